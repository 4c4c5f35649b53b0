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

#pragma once

// Small graph builders and brute-force reference implementations shared by
// the unit tests and the acceptance suite. The references deliberately use
// different algorithms from the library (path enumeration, DFS reachability,
// time-indexed exhaustive search) so agreement is meaningful.

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "kernsched/analysis.hpp"
#include "kernsched/dsl.hpp"
#include "kernsched/kernel.hpp"
#include "kernsched/scheduler.hpp"
#include "kernsched/util.hpp"

namespace kernsched::testing {

inline Dag make_dag(const std::vector<int> &durations, const std::vector<Edge> &edges, int capacity = 1,
                    const std::string &type = "add") {
    std::vector<NodeRecord> nodes;
    for (std::size_t i = 0; i < durations.size(); ++i)
        nodes.push_back({static_cast<NodeId>(i), type, durations[i]});
    return Dag::create(std::move(nodes), edges, {{type, capacity}});
}

inline Dag chain(int n, int capacity = 1) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i)
        edges.emplace_back(i, i + 1);
    return make_dag(std::vector<int>(static_cast<std::size_t>(n), 1), edges, capacity);
}

/// a=0 -> {b=1, c=2} -> d=3, unit durations.
inline Dag diamond(int capacity = 1) { return make_dag({1, 1, 1, 1}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, capacity); }

inline Dag independent(int n, int capacity, const std::string &type = "add") {
    return make_dag(std::vector<int>(static_cast<std::size_t>(n), 1), {}, capacity, type);
}

/// Random DAG over n nodes: edge i->j (i<j) with probability p, two op types,
/// durations 1..max_duration, capacities 1..2.
inline Dag random_dag(Rng &rng, int n, double p, int max_duration = 3) {
    const std::vector<std::string> types{"alu", "mem"};
    std::vector<NodeRecord> nodes;
    for (int i = 0; i < n; ++i)
        nodes.push_back({i, types[rng.below(2)], rng.between(1, max_duration)});
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.chance(p))
                edges.emplace_back(i, j);
    return Dag::create(std::move(nodes), std::move(edges), {{"alu", rng.between(1, 2)}, {"mem", rng.between(1, 2)}});
}

/// Same graph with node ids relabeled by `perm` (old id -> new id).
inline Dag permuted(const Dag &dag, const std::vector<NodeId> &perm) {
    std::vector<NodeRecord> nodes(dag.size());
    for (const auto &n : dag.nodes())
        nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(n.id)])] = {perm[static_cast<std::size_t>(n.id)],
                                                                                n.op_type, n.duration};
    std::vector<Edge> edges;
    for (const auto &[u, v] : dag.edges())
        edges.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
    return Dag::create(std::move(nodes), std::move(edges), dag.capacities());
}

/// Longest duration-weighted path from v to any sink, by enumerating paths.
inline std::vector<int> brute_crit(const Dag &dag) {
    std::vector<int> out(dag.size(), 0);
    std::function<void(NodeId, int, int &)> walk = [&](NodeId v, int acc, int &best) {
        acc += dag.node(v).duration;
        if (dag.succs(v).empty())
            best = std::max(best, acc);
        for (const NodeId w : dag.succs(v))
            walk(w, acc, best);
    };
    for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v)
        walk(v, 0, out[static_cast<std::size_t>(v)]);
    return out;
}

inline bool reaches(const Dag &dag, NodeId from, NodeId to) {
    if (from == to)
        return true;
    for (const NodeId w : dag.succs(from))
        if (reaches(dag, w, to))
            return true;
    return false;
}

/// Child pairs {u, w} of v with some x reachable from both (reflexively).
inline std::vector<int> brute_reconv(const Dag &dag) {
    const auto n = static_cast<NodeId>(dag.size());
    std::vector<int> out(dag.size(), 0);
    for (NodeId v = 0; v < n; ++v) {
        const auto kids = dag.succs(v);
        for (std::size_t i = 0; i < kids.size(); ++i)
            for (std::size_t j = i + 1; j < kids.size(); ++j)
                for (NodeId x = 0; x < n; ++x)
                    if (reaches(dag, kids[i], x) && reaches(dag, kids[j], x)) {
                        ++out[static_cast<std::size_t>(v)];
                        break;
                    }
    }
    return out;
}

/**
 * Exhaustive time-indexed search: every node tries every start in
 * [earliest, horizon - d] in topological order, tracking per-cycle usage.
 * Only prunes on the incumbent (start + remaining path >= best).
 */
inline int brute_optimal_makespan(const Dag &dag) {
    if (dag.empty())
        return 0;
    const auto crit = brute_crit(dag);
    int horizon = 0;
    for (const auto &n : dag.nodes())
        horizon += n.duration;
    int best = horizon;
    const auto &order = dag.topo_order();
    std::vector<int> start(dag.size(), -1);
    std::map<std::string, std::vector<int>> usage;
    for (const auto &[t, c] : dag.capacities())
        usage[t].assign(static_cast<std::size_t>(horizon), 0);

    std::function<void(std::size_t, int)> place = [&](std::size_t k, int span) {
        if (k == order.size()) {
            best = std::min(best, span);
            return;
        }
        const NodeId v = order[k];
        const auto &node = dag.node(v);
        int est = 0;
        for (const NodeId u : dag.preds(v))
            est = std::max(est, start[static_cast<std::size_t>(u)] + dag.node(u).duration);
        auto &use = usage[node.op_type];
        const int cap = dag.capacity(node.op_type);
        for (int s = est; s + crit[static_cast<std::size_t>(v)] < best; ++s) {
            bool fits = true;
            for (int c = s; c < s + node.duration; ++c)
                fits = fits && use[static_cast<std::size_t>(c)] < cap;
            if (!fits)
                continue;
            for (int c = s; c < s + node.duration; ++c)
                ++use[static_cast<std::size_t>(c)];
            start[static_cast<std::size_t>(v)] = s;
            place(k + 1, std::max(span, s + node.duration));
            for (int c = s; c < s + node.duration; ++c)
                --use[static_cast<std::size_t>(c)];
        }
        start[static_cast<std::size_t>(v)] = -1;
    };
    place(0, 0);
    return best;
}

/// Random linear expression over the full vocabulary (1-4 terms, integer
/// and quarter coefficients in [-8, 8]).
inline PriorityExpr random_expr(Rng &rng) {
    for (;;) {
        std::vector<Term> terms;
        const auto count = rng.between(1, 4);
        for (int i = 0; i < count; ++i) {
            const double coeff = static_cast<double>(rng.between(-32, 32)) / 4.0;
            terms.push_back({coeff, all_features[rng.below(all_features.size())]});
        }
        try {
            return PriorityExpr::from_terms(terms);
        } catch (const FormatError &) {
            // every coefficient cancelled; draw again
        }
    }
}

/// The six-policy battery used by the feasibility and oracle suites.
inline std::vector<std::pair<std::string, PriorityExpr>> heuristic_battery(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Term> random_terms;
    for (const Feature f : {Feature::crit, Feature::fanout, Feature::level, Feature::slack, Feature::reconv})
        random_terms.push_back({static_cast<double>(rng.between(-8, 8)) / 2.0 + 0.125, f});
    return {
        {"baseline", baseline_priority()},
        {"crit_fanout_level", parse_expr("1*crit + 1*fanout - 1*level")},
        {"reconvergent_A", instantiate_defaults(TemplateSpec::defaults_for(TemplateFamily::reconvergent_A))},
        {"deep_chain_B", instantiate_defaults(TemplateSpec::defaults_for(TemplateFamily::deep_chain_B))},
        {"fanout_only", parse_expr("1*fanout")},
        {"random_coefficients", PriorityExpr::from_terms(random_terms)},
    };
}

/// True when the expression induces a strict total order on this graph's nodes.
inline bool strict_order(const PriorityExpr &expr, const Dag &dag, const GraphStats &stats) {
    auto prio = eval_all(expr, dag, stats);
    std::sort(prio.begin(), prio.end());
    return std::adjacent_find(prio.begin(), prio.end()) == prio.end();
}

} // namespace kernsched::testing
