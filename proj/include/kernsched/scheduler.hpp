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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernsched/analysis.hpp"
#include "kernsched/dsl.hpp"

namespace kernsched {

/// How scheduling wall time is reported. `zero` makes every result bit-reproducible.
enum class RuntimeMode { wallclock, zero };

struct Schedule {
    std::vector<int> start; ///< indexed by node id
    int makespan = 0;
    bool feasible = true;
    double runtime_ms = 0.0;
    std::string note; ///< why the run was marked infeasible, if it was
};

/**
 * Cycle-stepping list scheduler.
 *
 * At every cycle the ready set (all predecessors finished) is ranked by
 * priority descending then node id ascending, and nodes are admitted while
 * their type has a free unit. A node holds one unit of its type for
 * [start, start + duration).
 *
 * A non-finite priority on any node poisons the run: the result carries the
 * serial topological schedule with `feasible == false`.
 */
Schedule list_schedule(const Dag &dag, const GraphStats &stats, const PriorityExpr &priority,
                       RuntimeMode mode = RuntimeMode::wallclock);

/// Same engine over precomputed per-node priorities.
Schedule list_schedule_priorities(const Dag &dag, const std::vector<double> &priority);

enum class ViolationKind { missing_start, negative_start, precedence, resource };

struct Violation {
    ViolationKind kind;
    NodeId node = -1;      ///< offending node (successor for precedence)
    NodeId other = -1;     ///< predecessor for precedence
    std::string op_type;   ///< resource violations
    int cycle = -1;        ///< resource violations
    int in_use = 0;
    std::string message;
};

/// Independent re-check of precedence and per-cycle capacity. Empty means feasible.
std::vector<Violation> verify_schedule(const Dag &dag, const std::vector<int> &start);
inline std::vector<Violation> verify_schedule(const Dag &dag, const Schedule &s) {
    return verify_schedule(dag, s.start);
}

/// max(critical path, max_t ceil(work_t / R_t)).
int makespan_lower_bound(const Dag &dag, const GraphStats &stats);

inline constexpr std::size_t optimal_oracle_max_nodes = 12;

/// Exact minimum makespan by branch-and-bound; rejects graphs above the node limit.
int optimal_makespan(const Dag &dag);

nlohmann::ordered_json schedule_to_json(const Schedule &s);

} // namespace kernsched
