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

#include "kernsched/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <queue>

#include <fmt/format.h>

namespace kernsched {

namespace {

/// Dense op-type indices so the hot loops avoid string lookups.
struct TypeTable {
    std::vector<int> of_node;
    std::vector<int> capacity;
    std::vector<std::string> names;

    explicit TypeTable(const Dag &dag) {
        for (const auto &[type, cap] : dag.capacities()) {
            names.push_back(type);
            capacity.push_back(cap);
        }
        of_node.reserve(dag.size());
        for (const auto &n : dag.nodes()) {
            const auto it = std::lower_bound(names.begin(), names.end(), n.op_type);
            of_node.push_back(static_cast<int>(it - names.begin()));
        }
    }
};

Schedule serial_schedule(const Dag &dag) {
    Schedule s;
    s.start.assign(dag.size(), 0);
    int t = 0;
    for (const NodeId v : dag.topo_order()) {
        s.start[static_cast<std::size_t>(v)] = t;
        t += dag.node(v).duration;
    }
    s.makespan = t;
    return s;
}

} // namespace

Schedule list_schedule_priorities(const Dag &dag, const std::vector<double> &priority) {
    const std::size_t n = dag.size();
    for (std::size_t v = 0; v < n; ++v) {
        if (!std::isfinite(priority[v])) {
            Schedule s = serial_schedule(dag);
            s.feasible = false;
            s.note = fmt::format("priority of node {} is not finite", v);
            return s;
        }
    }

    const TypeTable types(dag);
    std::vector<int> busy(types.capacity.size(), 0);
    std::vector<int> waiting(n);
    std::vector<NodeId> pool;
    for (std::size_t v = 0; v < n; ++v) {
        waiting[v] = static_cast<int>(dag.preds(static_cast<NodeId>(v)).size());
        if (waiting[v] == 0)
            pool.push_back(static_cast<NodeId>(v));
    }

    using Finish = std::pair<int, NodeId>;
    std::priority_queue<Finish, std::vector<Finish>, std::greater<>> running;

    Schedule s;
    s.start.assign(n, -1);
    std::size_t started = 0;
    int cycle = 0;
    const auto by_priority = [&](NodeId a, NodeId b) {
        const double pa = priority[static_cast<std::size_t>(a)];
        const double pb = priority[static_cast<std::size_t>(b)];
        return pa != pb ? pa > pb : a < b;
    };

    while (started < n) {
        while (!running.empty() && running.top().first <= cycle) {
            const NodeId done = running.top().second;
            running.pop();
            --busy[static_cast<std::size_t>(types.of_node[static_cast<std::size_t>(done)])];
            for (const NodeId w : dag.succs(done))
                if (--waiting[static_cast<std::size_t>(w)] == 0)
                    pool.push_back(w);
        }

        std::sort(pool.begin(), pool.end(), by_priority);
        std::vector<NodeId> deferred;
        for (const NodeId v : pool) {
            const auto t = static_cast<std::size_t>(types.of_node[static_cast<std::size_t>(v)]);
            if (busy[t] < types.capacity[t]) {
                ++busy[t];
                s.start[static_cast<std::size_t>(v)] = cycle;
                running.emplace(cycle + dag.node(v).duration, v);
                ++started;
            } else {
                deferred.push_back(v);
            }
        }
        pool = std::move(deferred);

        // Nothing else can start before the next completion.
        if (started < n) {
            if (running.empty())
                throw InvariantError("list scheduler stalled with unscheduled nodes");
            cycle = running.top().first;
        }
    }

    for (std::size_t v = 0; v < n; ++v)
        s.makespan = std::max(s.makespan, s.start[v] + dag.nodes()[v].duration);
    return s;
}

Schedule list_schedule(const Dag &dag, const GraphStats &stats, const PriorityExpr &priority, RuntimeMode mode) {
    const auto t0 = std::chrono::steady_clock::now();
    Schedule s = list_schedule_priorities(dag, eval_all(priority, dag, stats));
    const auto t1 = std::chrono::steady_clock::now();
    s.runtime_ms = mode == RuntimeMode::zero ? 0.0 : std::chrono::duration<double, std::milli>(t1 - t0).count();
    return s;
}

std::vector<Violation> verify_schedule(const Dag &dag, const std::vector<int> &start) {
    std::vector<Violation> out;
    if (start.size() != dag.size()) {
        out.push_back({ViolationKind::missing_start, -1, -1, {}, -1, 0,
                       fmt::format("schedule has {} start times for {} nodes", start.size(), dag.size())});
        return out;
    }
    for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v) {
        if (start[static_cast<std::size_t>(v)] < 0)
            out.push_back({ViolationKind::negative_start, v, -1, {}, -1, 0,
                           fmt::format("node {} has negative start {}", v, start[static_cast<std::size_t>(v)])});
    }
    for (const auto &[u, v] : dag.edges()) {
        const int ready = start[static_cast<std::size_t>(u)] + dag.node(u).duration;
        if (start[static_cast<std::size_t>(v)] < ready)
            out.push_back({ViolationKind::precedence, v, u, {}, -1, 0,
                           fmt::format("precedence ({}, {}): node {} starts at {} before {} finishes at {}", u, v, v,
                                       start[static_cast<std::size_t>(v)], u, ready)});
    }
    for (const auto &[type, cap] : dag.capacities()) {
        std::vector<std::pair<int, int>> events;
        for (const auto &n : dag.nodes()) {
            if (n.op_type != type)
                continue;
            events.emplace_back(start[static_cast<std::size_t>(n.id)], +1);
            events.emplace_back(start[static_cast<std::size_t>(n.id)] + n.duration, -1);
        }
        std::sort(events.begin(), events.end());
        int in_use = 0;
        for (std::size_t i = 0; i < events.size();) {
            const int t = events[i].first;
            for (; i < events.size() && events[i].first == t; ++i)
                in_use += events[i].second;
            if (in_use > cap)
                out.push_back({ViolationKind::resource, -1, -1, type, t, in_use,
                               fmt::format("type '{}' uses {} units at cycle {} (capacity {})", type, in_use, t, cap)});
        }
    }
    return out;
}

int makespan_lower_bound(const Dag &dag, const GraphStats &stats) {
    int bound = stats.critical_path;
    std::map<std::string, long> work;
    for (const auto &n : dag.nodes())
        work[n.op_type] += n.duration;
    for (const auto &[type, w] : work) {
        const long cap = dag.capacity(type);
        bound = std::max(bound, static_cast<int>((w + cap - 1) / cap));
    }
    return bound;
}

int optimal_makespan(const Dag &dag) {
    const std::size_t n = dag.size();
    if (n > optimal_oracle_max_nodes)
        throw UsageError(fmt::format("optimal_makespan supports at most {} nodes, graph has {}",
                                     optimal_oracle_max_nodes, n));
    if (n == 0)
        return 0;

    const GraphStats stats = analyze(dag);
    const TypeTable types(dag);
    const int horizon = static_cast<int>(dag.total_work());
    const int lower = makespan_lower_bound(dag, stats);

    int best = horizon;
    for (const Feature f : {Feature::crit, Feature::level, Feature::fanout}) {
        const auto s = list_schedule_priorities(dag, eval_all(PriorityExpr::from_terms({{1.0, f}}), dag, stats));
        best = std::min(best, s.makespan);
    }
    if (best == lower)
        return best;

    // Serial schedule generation over precedence-feasible orders; each node
    // goes to its earliest resource-feasible start. Orders are restricted to
    // non-decreasing (start, id), which still reaches every active schedule.
    std::vector<std::vector<int>> usage(types.capacity.size(), std::vector<int>(static_cast<std::size_t>(horizon), 0));
    std::vector<int> start(n, -1);
    std::vector<int> unplaced_preds(n);
    for (std::size_t v = 0; v < n; ++v)
        unplaced_preds[v] = static_cast<int>(dag.preds(static_cast<NodeId>(v)).size());
    std::vector<int> est(n);

    const auto bound = [&](int current) {
        int lb = current;
        std::vector<int> first_free(types.capacity.size(), horizon);
        std::vector<long> remaining(types.capacity.size(), 0);
        for (const NodeId v : dag.topo_order()) {
            const auto i = static_cast<std::size_t>(v);
            if (start[i] >= 0)
                continue;
            int e = 0;
            for (const NodeId u : dag.preds(v)) {
                const auto j = static_cast<std::size_t>(u);
                e = std::max(e, (start[j] >= 0 ? start[j] : est[j]) + dag.node(u).duration);
            }
            est[i] = e;
            lb = std::max(lb, e + stats.crit[i]);
            const auto t = static_cast<std::size_t>(types.of_node[i]);
            first_free[t] = std::min(first_free[t], e);
            remaining[t] += dag.node(v).duration;
        }
        for (std::size_t t = 0; t < remaining.size(); ++t)
            if (remaining[t] > 0)
                lb = std::max(lb, first_free[t] + static_cast<int>((remaining[t] + types.capacity[t] - 1) /
                                                                    types.capacity[t]));
        return lb;
    };

    std::function<void(std::size_t, int, int, NodeId)> search = [&](std::size_t placed, int current, int last_start,
                                                                    NodeId last_node) {
        if (best == lower)
            return;
        if (placed == n) {
            best = std::min(best, current);
            return;
        }
        if (bound(current) >= best)
            return;
        for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) {
            const auto i = static_cast<std::size_t>(v);
            if (start[i] >= 0 || unplaced_preds[i] > 0)
                continue;
            const int d = dag.node(v).duration;
            const auto t = static_cast<std::size_t>(types.of_node[i]);
            int s = 0;
            for (const NodeId u : dag.preds(v))
                s = std::max(s, start[static_cast<std::size_t>(u)] + dag.node(u).duration);
            bool fits = false;
            while (s + d < best) {
                fits = true;
                for (int c = s; c < s + d && fits; ++c)
                    fits = usage[t][static_cast<std::size_t>(c)] < types.capacity[t];
                if (fits)
                    break;
                ++s;
            }
            if (!fits || s < last_start || (s == last_start && v < last_node))
                continue;

            start[i] = s;
            for (int c = s; c < s + d; ++c)
                ++usage[t][static_cast<std::size_t>(c)];
            for (const NodeId w : dag.succs(v))
                --unplaced_preds[static_cast<std::size_t>(w)];

            search(placed + 1, std::max(current, s + d), s, v);

            for (const NodeId w : dag.succs(v))
                ++unplaced_preds[static_cast<std::size_t>(w)];
            for (int c = s; c < s + d; ++c)
                --usage[t][static_cast<std::size_t>(c)];
            start[i] = -1;
        }
    };
    search(0, 0, 0, -1);
    return best;
}

nlohmann::ordered_json schedule_to_json(const Schedule &s) {
    nlohmann::ordered_json starts = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < s.start.size(); ++v)
        starts[std::to_string(v)] = s.start[v];
    nlohmann::ordered_json out;
    out["starts"] = std::move(starts);
    out["makespan"] = s.makespan;
    out["feasible"] = s.feasible;
    out["runtime_ms"] = s.runtime_ms;
    return out;
}

} // namespace kernsched
