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

#include "kernsched/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "kernsched/motifs.hpp"
#include "kernsched/retrieval.hpp"
#include "kernsched/util.hpp"

namespace kernsched {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view ablation_name(Ablation a) {
    switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_retrieval: return "no_retrieval";
    case Ablation::no_motif: return "no_motif";
    case Ablation::random_kernel: return "random_kernel";
    }
    return "?";
}

Ablation ablation_from_name(std::string_view name) {
    for (const auto a : {Ablation::full, Ablation::no_retrieval, Ablation::no_motif, Ablation::random_kernel})
        if (ablation_name(a) == name)
            return a;
    throw UsageError(fmt::format("unknown ablation mode '{}'", name));
}

void LoopConfig::validate() const {
    if (iterations < 1)
        throw UsageError("iterations must be >= 1");
    if (top_m < 1)
        throw UsageError("top_m must be >= 1");
    if (batch_size < 1)
        throw UsageError("batch_size must be >= 1");
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw UsageError("lambda must be finite and non-negative");
    if (!std::isfinite(mu) || mu < 0.0)
        throw UsageError("mu must be finite and non-negative");
    if (library_budget < 1)
        throw UsageError("library_budget must be >= 1");
    if (max_retries < 0)
        throw UsageError("max_retries must be >= 0");
    const auto &k = provider.kind;
    if (k != "http" && k != "fallback" && k != "scripted")
        throw UsageError(fmt::format("unknown provider kind '{}'", k));
    if (k == "http" && provider.endpoint.empty())
        throw UsageError("http provider needs an endpoint");
}

ojson loop_config_to_json(const LoopConfig &c) {
    ojson provider;
    provider["kind"] = c.provider.kind;
    provider["endpoint"] = c.provider.endpoint;
    provider["model"] = c.provider.model;
    provider["auth_env"] = c.provider.auth_env;
    if (!c.provider.script.empty())
        provider["script"] = c.provider.script;
    ojson out;
    out["iterations"] = c.iterations;
    out["top_m"] = c.top_m;
    out["batch_size"] = c.batch_size;
    out["lambda"] = c.lambda;
    out["mu"] = c.mu;
    out["seed"] = c.seed;
    out["ablation"] = ablation_name(c.ablation);
    out["provider"] = std::move(provider);
    out["runtime_mode"] = c.runtime_mode == RuntimeMode::zero ? "zero" : "wallclock";
    out["library_budget"] = c.library_budget;
    out["max_retries"] = c.max_retries;
    out["fallback_enabled"] = c.fallback_enabled;
    return out;
}

LoopConfig loop_config_from_json(const json &doc) {
    if (!doc.is_object())
        throw FormatError("run config must be a JSON object");
    LoopConfig c;
    try {
        c.iterations = doc.value("iterations", c.iterations);
        c.top_m = doc.value("top_m", c.top_m);
        c.batch_size = doc.value("batch_size", c.batch_size);
        c.lambda = doc.value("lambda", c.lambda);
        c.mu = doc.value("mu", c.mu);
        c.seed = doc.value("seed", c.seed);
        c.ablation = ablation_from_name(doc.value("ablation", std::string(ablation_name(c.ablation))));
        c.library_budget = doc.value("library_budget", c.library_budget);
        c.max_retries = doc.value("max_retries", c.max_retries);
        c.fallback_enabled = doc.value("fallback_enabled", c.fallback_enabled);
        c.jobs = doc.value("jobs", c.jobs);
        const auto mode = doc.value("runtime_mode", std::string("wallclock"));
        if (mode != "wallclock" && mode != "zero")
            throw FormatError(fmt::format("runtime_mode must be \"wallclock\" or \"zero\", got '{}'", mode));
        c.runtime_mode = mode == "zero" ? RuntimeMode::zero : RuntimeMode::wallclock;
        if (doc.contains("provider")) {
            const auto &p = doc["provider"];
            c.provider.kind = p.value("kind", c.provider.kind);
            c.provider.endpoint = p.value("endpoint", c.provider.endpoint);
            c.provider.model = p.value("model", c.provider.model);
            c.provider.auth_env = p.value("auth_env", c.provider.auth_env);
            c.provider.script = p.value("script", c.provider.script);
        }
    } catch (const json::exception &e) {
        throw FormatError(fmt::format("malformed run config: {}", e.what()));
    }
    return c;
}

GraphSet GraphSet::from_graphs(std::vector<Dag> graphs, std::string_view prefix) {
    GraphSet set;
    for (std::size_t i = 0; i < graphs.size(); ++i)
        set.add(fmt::format("{}_{:04}", prefix, i), std::move(graphs[i]));
    return set;
}

void GraphSet::add(std::string name, Dag dag) {
    stats.push_back(analyze(dag));
    names.push_back(std::move(name));
    graphs.push_back(std::move(dag));
}

GraphSet GraphSet::subset(std::span<const std::size_t> indices) const {
    GraphSet out;
    for (const std::size_t i : indices) {
        out.names.push_back(names[i]);
        out.graphs.push_back(graphs[i]);
        out.stats.push_back(stats[i]);
    }
    return out;
}

double score(const Schedule &s, double lambda, double mu) {
    return -static_cast<double>(s.makespan) - lambda * s.runtime_ms - (s.feasible ? 0.0 : mu);
}

double mean_score(std::span<const double> scores) {
    if (scores.empty())
        throw UsageError("mean score over an empty validation set");
    double sum = 0.0;
    for (const double s : scores)
        sum += s;
    return sum / static_cast<double>(scores.size());
}

Evaluation evaluate(const PriorityExpr &heuristic, const GraphSet &graphs, const LoopConfig &config) {
    if (graphs.empty())
        throw UsageError("cannot evaluate a heuristic on an empty graph set");
    Evaluation ev;
    ev.graphs.resize(graphs.size());
    parallel_for(graphs.size(), config.jobs, [&](std::size_t i) {
        const Schedule s = list_schedule(graphs.graphs[i], graphs.stats[i], heuristic, config.runtime_mode);
        ev.graphs[i] = {graphs.names[i], s.makespan, s.runtime_ms, s.feasible, score(s, config.lambda, config.mu),
                        s.note};
    });
    std::vector<double> scores;
    for (const auto &g : ev.graphs)
        scores.push_back(g.score);
    ev.mean_score = mean_score(scores);
    return ev;
}

BatchSummary summarize_batch(const GraphSet &batch) {
    BatchSummary s;
    s.graphs = batch.names;
    s.mean_fanout_histogram.assign(histogram_bins, 0.0);
    if (batch.empty())
        return s;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto &g = batch.graphs[i];
        const auto &st = batch.stats[i];
        s.mean_nodes += static_cast<double>(g.size()) * inv;
        s.mean_edges += static_cast<double>(g.edges().size()) * inv;
        s.mean_critical_path += st.critical_path * inv;
        double max_pressure = 0.0;
        for (const auto &[type, p] : st.pressure)
            max_pressure = std::max(max_pressure, p);
        s.mean_max_pressure += max_pressure * inv;
        for (const int f : st.fanout)
            s.mean_fanout_histogram[fanout_bin(f)] += inv / static_cast<double>(g.size());
    }
    return s;
}

Prompt build_prompt(const GraphSet &batch, std::vector<Kernel> kernels, std::vector<std::string> feedback) {
    std::sort(kernels.begin(), kernels.end(), [](const Kernel &a, const Kernel &b) { return a.id < b.id; });
    return {summarize_batch(batch), std::move(kernels), std::move(feedback)};
}

namespace {

std::string join_numbers(std::span<const double> xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += fmt::format("{}{:.4f}", i ? ", " : "", xs[i]);
    return out + "]";
}

std::string template_formula(const TemplateSpec &t) {
    std::string out;
    for (std::size_t i = 0; i < t.weights.size(); ++i) {
        const auto &w = t.weights[i];
        if (i > 0)
            out += w.sign < 0 ? " - " : " + ";
        else if (w.sign < 0)
            out += "-";
        out += fmt::format("{}*{}", w.name, feature_name(w.feature));
    }
    return out;
}

constexpr std::string_view problem_section = R"(## Problem
Schedule a directed acyclic graph of operations on typed functional units.
Each operation has a type and a duration in cycles; each type t has R_t units.
An operation may start once all of its predecessors have finished, and at most
R_t operations of type t may be executing in any cycle. The scheduler is a
cycle-by-cycle list scheduler: every cycle it ranks the ready operations by
your priority (higher first, ties by lower node id) and starts them while
units are free. Goal: minimize the makespan. Candidates are scored by
J = -latency - lambda * runtime_ms - mu * [infeasible]; higher is better.
)";

constexpr std::string_view dsl_section = R"(## Priority language
expr    := term (('+' | '-') term)*
term    := number '*' feature | feature | number
feature := const | crit | duration | fanin | fanout | level | pressure | reconv | slack
  crit      longest duration-weighted path from the node to a sink (node included)
  level     earliest start ignoring resources
  slack     critical-path length - level - crit
  fanout    number of successors;  fanin  number of predecessors
  reconv    child pairs that reach a common descendant
  duration  node duration;  pressure  work/(capacity*critical path) of the node's type
  const     1

## Output contract
Reply with exactly one expression line in the language above and nothing else.
)";

} // namespace

std::string render(const Prompt &prompt) {
    std::string out(problem_section);
    const auto &b = prompt.batch;
    out += fmt::format("\n## Target batch\ngraphs: {}\n", b.graphs.size());
    out += fmt::format("mean nodes: {:.4f}\nmean edges: {:.4f}\nmean critical path: {:.4f}\n", b.mean_nodes,
                       b.mean_edges, b.mean_critical_path);
    out += fmt::format("mean max type pressure: {:.4f}\n", b.mean_max_pressure);
    out += fmt::format("mean fanout histogram (0,1,2,3,4-5,6-8,9-16,17+): {}\n",
                       join_numbers(b.mean_fanout_histogram));

    if (!prompt.kernels.empty()) {
        out += fmt::format("\n## Retrieved kernels ({})\n", prompt.kernels.size());
        for (const auto &k : prompt.kernels) {
            out += fmt::format("kernel {} [{}, support {}]\n", k.id, category_name(k.category), k.support);
            out += fmt::format("  signature: {}\n", join_numbers(k.signature));
            out += fmt::format("  template {}: {}\n", family_name(k.tmpl.family), template_formula(k.tmpl));
            std::vector<std::string> ranges;
            for (const auto &w : k.tmpl.weights)
                ranges.push_back(fmt::format("{}={} in [{}, {}]", w.name, w.default_value, w.lo, w.hi));
            out += fmt::format("  weights: {}\n", fmt::join(ranges, ", "));
            out += fmt::format("  default instance: {}\n", print_expr(instantiate_defaults(k.tmpl)));
        }
    }

    out += "\n";
    out += dsl_section;

    if (!prompt.feedback.empty()) {
        out += "\n## Feedback from earlier iterations\n";
        for (const auto &f : prompt.feedback)
            out += f + "\n";
    }
    return out;
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> replies) : replies_(std::move(replies)) {
    if (replies_.empty())
        throw UsageError("scripted provider needs at least one reply");
}

std::string ScriptedProvider::propose(const SynthesisRequest &) {
    const std::size_t i = std::min(next_, replies_.size() - 1);
    ++next_;
    return replies_[i];
}

std::string FallbackProvider::propose(const SynthesisRequest &request) {
    return print_expr(fallback_synthesize(request.prompt.kernels, request.batch, request.config));
}

std::unique_ptr<HeuristicProvider> make_provider(const ProviderDescriptor &descriptor) {
    if (descriptor.kind == "fallback")
        return std::make_unique<FallbackProvider>();
    if (descriptor.kind == "scripted")
        return std::make_unique<ScriptedProvider>(descriptor.script);
    if (descriptor.kind == "http")
        return std::make_unique<HttpProvider>(descriptor);
    throw UsageError(fmt::format("unknown provider kind '{}'", descriptor.kind));
}

std::optional<PriorityExpr> extract_expression(std::string_view reply) {
    while (!reply.empty()) {
        const auto nl = reply.find('\n');
        auto line = reply.substr(0, nl);
        reply = nl == std::string_view::npos ? std::string_view{} : reply.substr(nl + 1);
        const auto first = line.find_first_not_of(" \t\r`");
        if (first == std::string_view::npos)
            continue;
        line = line.substr(first);
        line = line.substr(0, line.find_last_not_of(" \t\r`") + 1);
        if (line.starts_with("#"))
            continue;
        try {
            return parse_expr(line);
        } catch (const ParseError &) {
        }
    }
    return std::nullopt;
}

std::string make_feedback(const RunRecord &record, const Evaluation &baseline, const GraphSet &validation) {
    struct Regression {
        std::size_t index;
        int delta;
    };
    std::vector<Regression> regressions;
    std::vector<std::size_t> infeasible;
    for (std::size_t i = 0; i < record.evaluation.graphs.size(); ++i) {
        const auto &r = record.evaluation.graphs[i];
        if (!r.feasible)
            infeasible.push_back(i);
        const int delta = r.latency - baseline.graphs[i].latency;
        if (delta > 0)
            regressions.push_back({i, delta});
    }
    std::stable_sort(regressions.begin(), regressions.end(),
                     [](const Regression &a, const Regression &b) { return a.delta > b.delta; });

    const auto describe = [&](std::size_t i) {
        const auto &st = validation.stats[i];
        const auto &g = validation.graphs[i];
        double mean_crit = 0.0;
        for (const int c : st.crit)
            mean_crit += st.critical_path > 0 ? static_cast<double>(c) / st.critical_path : 0.0;
        mean_crit /= std::max<std::size_t>(1, g.size());
        return fmt::format("nodes={} edges={} critical_path={} mean_crit_ratio={:.4f}", g.size(), g.edges().size(),
                           st.critical_path, mean_crit);
    };

    std::string out = fmt::format("Iteration {}: heuristic `{}` mean score {:.4f}\n", record.iteration,
                                  print_expr(record.heuristic), record.evaluation.mean_score);
    out += fmt::format("regressions vs level baseline: {}\n", regressions.size());
    for (std::size_t k = 0; k < regressions.size() && k < 5; ++k) {
        const auto &r = regressions[k];
        const auto &res = record.evaluation.graphs[r.index];
        out += fmt::format("- {}: latency {} vs baseline {} (+{}); {}\n", res.graph, res.latency,
                           baseline.graphs[r.index].latency, r.delta, describe(r.index));
    }
    out += fmt::format("infeasible runs: {}\n", infeasible.size());
    for (std::size_t k = 0; k < infeasible.size() && k < 5; ++k) {
        const auto &res = record.evaluation.graphs[infeasible[k]];
        out += fmt::format("- {}: INFEASIBLE ({}); {}\n", res.graph, res.note, describe(infeasible[k]));
    }
    return out;
}

KernelLibrary ablation_library(const LoopConfig &config, const GraphSet &train, const KernelLibrary *library) {
    switch (config.ablation) {
    case Ablation::no_retrieval:
        return {};
    case Ablation::no_motif: {
        TypeVocabulary vocab = library ? library->vocab : TypeVocabulary::from_graphs(train.graphs);
        Normalizer normalizer;
        if (library) {
            normalizer = library->normalizer;
        } else {
            std::vector<Vector> whole;
            for (std::size_t i = 0; i < train.size(); ++i)
                whole.push_back(embed(train.graphs[i], train.stats[i], vocab));
            normalizer = Normalizer::fit(whole);
        }
        return whole_graph_library(train.graphs, vocab, normalizer, config.library_budget);
    }
    case Ablation::full:
    case Ablation::random_kernel:
        if (!library || library->kernels.empty())
            throw UsageError(fmt::format("ablation mode '{}' needs a kernel library", ablation_name(config.ablation)));
        return *library;
    }
    return {};
}

LoopResult run_loop(const GraphSet &train, const GraphSet &validation, const KernelLibrary *library,
                    const LoopConfig &config, HeuristicProvider &provider) {
    config.validate();
    if (train.empty() || validation.empty())
        throw UsageError("the synthesis loop needs non-empty training and validation sets");

    const KernelLibrary lib = ablation_library(config, train, library);
    std::vector<Vector> queries;
    if (!lib.kernels.empty()) {
        for (std::size_t i = 0; i < train.size(); ++i)
            queries.push_back(lib.query(train.graphs[i], train.stats[i]));
    }

    Rng batch_rng(config.seed);
    Rng kernel_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    FallbackProvider fallback;

    LoopResult result;
    result.baseline = evaluate(baseline_priority(), validation, config);
    std::vector<std::string> feedback;

    for (int it = 1; it <= config.iterations; ++it) {
        auto picks = batch_rng.sample(train.size(), config.batch_size);
        std::sort(picks.begin(), picks.end());
        const GraphSet batch = train.subset(picks);

        std::set<int> chosen;
        if (!lib.kernels.empty()) {
            for (const std::size_t g : picks) {
                if (config.ablation == Ablation::random_kernel) {
                    for (const std::size_t k : kernel_rng.sample(lib.kernels.size(), config.top_m))
                        chosen.insert(lib.kernels[k].id);
                } else {
                    for (const auto &r : retrieve_topm(queries[g], lib.kernels, config.top_m))
                        chosen.insert(r.id);
                }
            }
        }
        std::vector<Kernel> aggregated;
        for (const auto &k : lib.kernels)
            if (chosen.contains(k.id))
                aggregated.push_back(k);

        const Prompt prompt = build_prompt(batch, aggregated, feedback);
        const std::string text = render(prompt);
        const SynthesisRequest request{prompt, text, batch, config};

        RunRecord record;
        record.iteration = it;
        record.batch = batch.names;
        record.kernel_ids.assign(chosen.begin(), chosen.end());

        std::optional<PriorityExpr> candidate;
        for (int attempt = 0; attempt <= config.max_retries && !candidate; ++attempt) {
            ++record.attempts;
            try {
                candidate = extract_expression(provider.propose(request));
            } catch (const ProviderError &) {
                if (!config.fallback_enabled)
                    throw;
                break;
            }
        }
        if (candidate) {
            record.source = provider.name();
        } else {
            if (!config.fallback_enabled)
                throw ProviderError(fmt::format("iteration {}: provider gave no valid expression in {} attempt(s)",
                                                it, record.attempts));
            candidate = fallback_synthesize(prompt.kernels, batch, config);
            record.source = fallback.name();
        }
        record.heuristic = *candidate;
        record.evaluation = evaluate(record.heuristic, validation, config);
        for (std::size_t i = 0; i < record.evaluation.graphs.size(); ++i) {
            const auto &r = record.evaluation.graphs[i];
            if (!r.feasible || r.latency > result.baseline.graphs[i].latency)
                record.failures.push_back(r.graph);
        }
        record.feedback = make_feedback(record, result.baseline, validation);
        feedback.push_back(record.feedback);
        result.history.push_back(std::move(record));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.history.size(); ++i)
        if (result.history[i].evaluation.mean_score > result.history[best].evaluation.mean_score)
            best = i;
    result.best = result.history[best].heuristic;
    result.best_iteration = result.history[best].iteration;
    result.best_mean_score = result.history[best].evaluation.mean_score;
    return result;
}

namespace {

ojson evaluation_to_json(const Evaluation &ev) {
    ojson graphs = ojson::array();
    for (const auto &g : ev.graphs) {
        ojson row;
        row["graph"] = g.graph;
        row["latency"] = g.latency;
        row["runtime_ms"] = g.runtime_ms;
        row["feasible"] = g.feasible;
        row["score"] = g.score;
        graphs.push_back(std::move(row));
    }
    ojson out;
    out["graphs"] = std::move(graphs);
    out["mean_score"] = ev.mean_score;
    return out;
}

} // namespace

ojson history_to_json(const LoopResult &result, const LoopConfig &config) {
    ojson iterations = ojson::array();
    for (const auto &r : result.history) {
        ojson it;
        it["iteration"] = r.iteration;
        it["heuristic"] = print_expr(r.heuristic);
        it["source"] = r.source;
        it["attempts"] = r.attempts;
        it["batch"] = r.batch;
        it["kernels"] = r.kernel_ids;
        it["evaluation"] = evaluation_to_json(r.evaluation);
        it["failures"] = r.failures;
        it["feedback"] = r.feedback;
        iterations.push_back(std::move(it));
    }
    ojson best;
    best["iteration"] = result.best_iteration;
    best["heuristic"] = print_expr(result.best);
    best["mean_score"] = result.best_mean_score;

    ojson out;
    out["config"] = loop_config_to_json(config);
    out["baseline"] = evaluation_to_json(result.baseline);
    out["iterations"] = std::move(iterations);
    out["best"] = std::move(best);
    return out;
}

} // namespace kernsched
