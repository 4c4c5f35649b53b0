/*
Copyright 2026 The kernsched Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "kernsched/analysis.hpp"

#include <algorithm>

namespace kernsched {

std::vector<int> compute_levels(const Dag &dag) {
    std::vector<int> level(dag.size(), 0);
    for (const NodeId v : dag.topo_order()) {
        int best = 0;
        for (const NodeId u : dag.preds(v))
            best = std::max(best, level[static_cast<std::size_t>(u)] + dag.node(u).duration);
        level[static_cast<std::size_t>(v)] = best;
    }
    return level;
}

std::vector<int> compute_crit(const Dag &dag) {
    std::vector<int> crit(dag.size(), 0);
    const auto &order = dag.topo_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId v = *it;
        int tail = 0;
        for (const NodeId w : dag.succs(v))
            tail = std::max(tail, crit[static_cast<std::size_t>(w)]);
        crit[static_cast<std::size_t>(v)] = dag.node(v).duration + tail;
    }
    return crit;
}

int critical_path_length(const std::vector<int> &level, const std::vector<int> &crit) {
    int cp = 0;
    for (std::size_t v = 0; v < level.size(); ++v)
        cp = std::max(cp, level[v] + crit[v]);
    return cp;
}

std::vector<int> compute_slack(const Dag &dag, const std::vector<int> &level, const std::vector<int> &crit) {
    const int cp = critical_path_length(level, crit);
    std::vector<int> slack(dag.size(), 0);
    for (std::size_t v = 0; v < slack.size(); ++v)
        slack[v] = cp - level[v] - crit[v];
    return slack;
}

std::vector<boost::dynamic_bitset<>> reachability(const Dag &dag) {
    std::vector<boost::dynamic_bitset<>> reach(dag.size(), boost::dynamic_bitset<>(dag.size()));
    const auto &order = dag.topo_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto &row = reach[static_cast<std::size_t>(*it)];
        row.set(static_cast<std::size_t>(*it));
        for (const NodeId w : dag.succs(*it))
            row |= reach[static_cast<std::size_t>(w)];
    }
    return reach;
}

std::vector<int> compute_reconv(const Dag &dag) {
    const auto reach = reachability(dag);
    std::vector<int> reconv(dag.size(), 0);
    for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v) {
        const auto children = dag.succs(v);
        int count = 0;
        for (std::size_t i = 0; i < children.size(); ++i)
            for (std::size_t j = i + 1; j < children.size(); ++j)
                if (reach[static_cast<std::size_t>(children[i])].intersects(
                        reach[static_cast<std::size_t>(children[j])]))
                    ++count;
        reconv[static_cast<std::size_t>(v)] = count;
    }
    return reconv;
}

std::map<std::string, double> compute_pressure(const Dag &dag, int critical_path) {
    std::map<std::string, double> pressure;
    std::map<std::string, long> work;
    for (const auto &[type, cap] : dag.capacities())
        work[type] = 0;
    for (const auto &n : dag.nodes())
        work[n.op_type] += n.duration;
    for (const auto &[type, w] : work) {
        const double denom = static_cast<double>(dag.capacity(type)) * critical_path;
        pressure[type] = denom > 0.0 ? static_cast<double>(w) / denom : 0.0;
    }
    return pressure;
}

NodeStats GraphStats::node(const Dag &dag, NodeId v) const {
    const auto i = static_cast<std::size_t>(v);
    return {level[i], crit[i], slack[i], fanout[i], fanin[i], reconv[i], pressure_of(dag.node(v).op_type)};
}

double GraphStats::pressure_of(const std::string &op_type) const {
    const auto it = pressure.find(op_type);
    return it == pressure.end() ? 0.0 : it->second;
}

GraphStats analyze(const Dag &dag) {
    GraphStats s;
    s.level = compute_levels(dag);
    s.crit = compute_crit(dag);
    s.critical_path = critical_path_length(s.level, s.crit);
    s.slack = compute_slack(dag, s.level, s.crit);
    s.reconv = compute_reconv(dag);
    s.fanout.resize(dag.size());
    s.fanin.resize(dag.size());
    for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v) {
        s.fanout[static_cast<std::size_t>(v)] = static_cast<int>(dag.succs(v).size());
        s.fanin[static_cast<std::size_t>(v)] = static_cast<int>(dag.preds(v).size());
    }
    s.pressure = compute_pressure(dag, s.critical_path);
    return s;
}

} // namespace kernsched
