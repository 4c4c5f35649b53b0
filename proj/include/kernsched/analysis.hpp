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

#include <map>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "kernsched/graph.hpp"

namespace kernsched {

/// Per-node structural features used by priority expressions.
struct NodeStats {
    int level = 0;
    int crit = 0;
    int slack = 0;
    int fanout = 0;
    int fanin = 0;
    int reconv = 0;
    double pressure = 0.0; ///< pressure of the node's own op type
};

/**
 * All deterministic structural analyses of a Dag, computed once.
 *
 * level is the unconstrained ASAP start, crit the longest duration-weighted
 * path from the node to any sink (node included), slack the ALAP-ASAP gap
 * against the critical-path deadline.
 */
struct GraphStats {
    std::vector<int> level;
    std::vector<int> crit;
    std::vector<int> slack;
    std::vector<int> fanout;
    std::vector<int> fanin;
    std::vector<int> reconv;
    std::map<std::string, double> pressure;
    int critical_path = 0;

    NodeStats node(const Dag &dag, NodeId v) const;
    double pressure_of(const std::string &op_type) const;
};

std::vector<int> compute_levels(const Dag &dag);
std::vector<int> compute_crit(const Dag &dag);
int critical_path_length(const std::vector<int> &level, const std::vector<int> &crit);
std::vector<int> compute_slack(const Dag &dag, const std::vector<int> &level, const std::vector<int> &crit);

/// Reflexive-transitive reachability: row v has bit x set iff v reaches x (v reaches v).
std::vector<boost::dynamic_bitset<>> reachability(const Dag &dag);

/// Number of unordered child pairs of v that share a reachable node.
std::vector<int> compute_reconv(const Dag &dag);

/// Total work of each used type over capacity times the critical-path length.
std::map<std::string, double> compute_pressure(const Dag &dag, int critical_path);

GraphStats analyze(const Dag &dag);

} // namespace kernsched
