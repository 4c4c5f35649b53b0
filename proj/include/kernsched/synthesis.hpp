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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernsched/kernel.hpp"
#include "kernsched/scheduler.hpp"

namespace kernsched {

enum class Ablation { full, no_retrieval, no_motif, random_kernel };

std::string_view ablation_name(Ablation a);
Ablation ablation_from_name(std::string_view name); ///< throws UsageError

/// Which heuristic generator the loop queries. Auth tokens are read from
/// the environment variable named by `auth_env`, never stored.
struct ProviderDescriptor {
    std::string kind = "fallback"; ///< "http" | "fallback" | "scripted"
    std::string endpoint;
    std::string model;
    std::string auth_env = "KERNSCHED_API_KEY";
    std::vector<std::string> script; ///< replies for the scripted provider
};

struct LoopConfig {
    int iterations = 3;
    std::size_t top_m = 5;
    std::size_t batch_size = 8;
    double lambda = 0.01; ///< per millisecond of scheduling time
    double mu = 5000.0;
    std::uint64_t seed = 0;
    Ablation ablation = Ablation::full;
    ProviderDescriptor provider;
    RuntimeMode runtime_mode = RuntimeMode::wallclock;
    std::size_t library_budget = 50; ///< kernel cap, also for the no-motif library
    int max_retries = 2;
    bool fallback_enabled = true;
    unsigned jobs = 1;

    void validate() const; ///< throws UsageError
};

nlohmann::ordered_json loop_config_to_json(const LoopConfig &config);
/// Reads the known keys of `doc`, keeping defaults for missing ones.
LoopConfig loop_config_from_json(const nlohmann::json &doc);

/// Named graphs with their structural analyses precomputed.
struct GraphSet {
    std::vector<std::string> names;
    std::vector<Dag> graphs;
    std::vector<GraphStats> stats;

    static GraphSet from_graphs(std::vector<Dag> graphs, std::string_view prefix);
    void add(std::string name, Dag dag);
    std::size_t size() const { return graphs.size(); }
    bool empty() const { return graphs.empty(); }
    GraphSet subset(std::span<const std::size_t> indices) const;
};

/// J = -L - lambda * T_run - mu * [infeasible].
double score(const Schedule &s, double lambda, double mu);

struct GraphResult {
    std::string graph;
    int latency = 0;
    double runtime_ms = 0.0;
    bool feasible = true;
    double score = 0.0;
    std::string note;
};

struct Evaluation {
    std::vector<GraphResult> graphs;
    double mean_score = 0.0;
};

/// Arithmetic mean; throws UsageError when empty.
double mean_score(std::span<const double> scores);

/// Schedules `heuristic` on every graph and scores it.
Evaluation evaluate(const PriorityExpr &heuristic, const GraphSet &graphs, const LoopConfig &config);

struct BatchSummary {
    std::vector<std::string> graphs;
    double mean_nodes = 0.0;
    double mean_edges = 0.0;
    double mean_critical_path = 0.0;
    double mean_max_pressure = 0.0;
    std::vector<double> mean_fanout_histogram;
};

BatchSummary summarize_batch(const GraphSet &batch);

struct Prompt {
    BatchSummary batch;
    std::vector<Kernel> kernels;
    std::vector<std::string> feedback; ///< one section per earlier iteration
};

Prompt build_prompt(const GraphSet &batch, std::vector<Kernel> kernels, std::vector<std::string> feedback);

/// Fixed-order text: problem, target batch, kernels (if any), DSL and output
/// contract, feedback (if any).
std::string render(const Prompt &prompt);

struct SynthesisRequest {
    const Prompt &prompt;
    const std::string &rendered;
    const GraphSet &batch;
    const LoopConfig &config;
};

class HeuristicProvider {
  public:
    virtual ~HeuristicProvider() = default;
    virtual std::string name() const = 0;
    /// Raw reply text; throws ProviderError when the backend is unreachable.
    virtual std::string propose(const SynthesisRequest &request) = 0;
};

/// Replays fixed replies in order, repeating the last one once exhausted.
class ScriptedProvider : public HeuristicProvider {
  public:
    explicit ScriptedProvider(std::vector<std::string> replies);
    std::string name() const override { return "scripted"; }
    std::string propose(const SynthesisRequest &request) override;
    std::size_t calls() const { return next_; }

  private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

class FallbackProvider : public HeuristicProvider {
  public:
    std::string name() const override { return "fallback"; }
    std::string propose(const SynthesisRequest &request) override;
};

/// OpenAI-style chat-completions client over cpp-httplib.
class HttpProvider : public HeuristicProvider {
  public:
    explicit HttpProvider(ProviderDescriptor descriptor);
    std::string name() const override { return "http"; }
    std::string propose(const SynthesisRequest &request) override;

    /// Request body sent for `prompt_text`.
    nlohmann::json request_body(const std::string &prompt_text) const;

  private:
    ProviderDescriptor descriptor_;
};

std::unique_ptr<HeuristicProvider> make_provider(const ProviderDescriptor &descriptor);

/// First reply line (code fences and `#` comments skipped) that parses.
std::optional<PriorityExpr> extract_expression(std::string_view reply);

/// Weight search space the deterministic fallback explores.
struct SearchAxis {
    Feature feature;
    double start = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Term-wise merge of the distinct template families among `kernels`, or
/// crit/fanout/level at weight 1 when there are none.
std::vector<SearchAxis> fallback_search_space(std::span<const Kernel> kernels);

/**
 * Deterministic stand-in for the generator: coordinate descent over the
 * merged template weights on a fixed grid, maximizing the batch mean of
 * -L - mu * [infeasible] (scheduling time is left out so the result does not
 * depend on the machine).
 */
PriorityExpr fallback_synthesize(std::span<const Kernel> kernels, const GraphSet &batch, const LoopConfig &config);

struct RunRecord {
    int iteration = 0;
    PriorityExpr heuristic;
    std::string source; ///< provider name or "fallback"
    int attempts = 0;
    std::vector<std::string> batch;
    std::vector<int> kernel_ids;
    Evaluation evaluation;
    std::vector<std::string> failures;
    std::string feedback;
};

/// Lists up to 5 worst regressions against `baseline` (latency delta
/// descending) and every infeasible run (up to 5).
std::string make_feedback(const RunRecord &record, const Evaluation &baseline, const GraphSet &validation);

struct LoopResult {
    PriorityExpr best;
    int best_iteration = 0;
    double best_mean_score = 0.0;
    Evaluation baseline;
    std::vector<RunRecord> history;
};

/// Kernels the ablation mode retrieves from; empty for no_retrieval.
KernelLibrary ablation_library(const LoopConfig &config, const GraphSet &train, const KernelLibrary *library);

LoopResult run_loop(const GraphSet &train, const GraphSet &validation, const KernelLibrary *library,
                    const LoopConfig &config, HeuristicProvider &provider);

nlohmann::ordered_json history_to_json(const LoopResult &result, const LoopConfig &config);

} // namespace kernsched
