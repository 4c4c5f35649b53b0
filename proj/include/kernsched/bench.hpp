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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernsched/synthesis.hpp"

namespace kernsched {

enum class GraphFamily { layered, chain, fork_join, diamond_mesh };

std::string_view family_name(GraphFamily f);
GraphFamily graph_family_from_name(std::string_view name); ///< throws UsageError

struct IntRange {
    int lo = 1;
    int hi = 1;
};

/**
 * Random DAG workload description.
 *
 *   layered       `layers` layers of `width` nodes; each node draws edges from
 *                 the previous layer with `edge_prob` (at least one), and from
 *                 two layers back with edge_prob / 4
 *   chain         a single path of `layers` nodes
 *   fork_join     `layers` stages; each stage forks into `width` branches of
 *                 1-3 nodes that join again
 *   diamond_mesh  `layers` x `width` grid, (i,j) -> (i+1,j) and (i+1,j+1)
 *
 * Edges always run from earlier to later nodes, so every graph is acyclic.
 */
struct GeneratorSpec {
    GraphFamily family = GraphFamily::layered;
    IntRange layers{5, 9};
    IntRange width{6, 12};
    double edge_prob = 0.3;
    std::vector<std::pair<std::string, double>> types{{"add", 0.5}, {"mem", 0.15}, {"mul", 0.35}};
    std::vector<std::pair<int, double>> durations{{1, 0.6}, {2, 0.3}, {3, 0.1}};
    std::map<std::string, int> capacities{{"add", 2}, {"mem", 1}, {"mul", 1}};
    std::uint64_t seed = 1;

    void validate() const; ///< throws UsageError

    nlohmann::ordered_json to_json() const;
    static GeneratorSpec from_json(const nlohmann::json &doc);
};

std::vector<Dag> generate_suite(const GeneratorSpec &spec, std::size_t count);

/// Contention-heavy layered suite: wide layers against small capacities.
GeneratorSpec contention_heavy_spec(std::uint64_t seed);

struct StatsSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0; ///< sample (n-1) standard deviation
    double ci95 = 0.0; ///< 1.96 * std / sqrt(n)
    bool std_defined = true; ///< false for n == 1 (std reported as 0)
};

inline constexpr double ci95_multiplier = 1.96;

StatsSummary summarize(std::span<const double> values);

struct CampaignRow {
    std::string mode; ///< "baseline" or an ablation name
    std::string heuristic;
    std::vector<int> latencies;
    std::vector<double> runtimes_ms;
    StatsSummary latency;
    std::optional<double> runtime_ratio; ///< vs baseline; empty when baseline time is 0
};

struct CampaignReport {
    std::uint64_t seed = 0;
    std::string runtime_mode;
    std::vector<std::string> graphs;
    std::vector<CampaignRow> rows; ///< baseline first
    std::vector<LoopResult> loops;   ///< one per ablation row, not serialized

    const CampaignRow *row(std::string_view mode) const;

    nlohmann::ordered_json to_json() const;
    static CampaignReport from_json(const nlohmann::json &doc);
    std::string to_text() const;
    std::string to_csv() const;
};

struct CampaignOptions {
    int timing_repeats = 5; ///< median of this many scheduling runs per graph
};

/**
 * Runs the loop once per mode and re-evaluates each H* on the validation
 * graphs alongside the level baseline. Every schedule is re-verified; a
 * violation raises InvariantError.
 */
CampaignReport run_campaign(const GraphSet &train, const GraphSet &validation, const KernelLibrary *library,
                            std::span<const Ablation> modes, const LoopConfig &config,
                            const CampaignOptions &options = {});

} // namespace kernsched
