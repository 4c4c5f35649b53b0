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

#include "kernsched/bench.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kernsched/util.hpp"

namespace kernsched {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view family_name(GraphFamily f) {
    switch (f) {
    case GraphFamily::layered: return "layered";
    case GraphFamily::chain: return "chain";
    case GraphFamily::fork_join: return "fork_join";
    case GraphFamily::diamond_mesh: return "diamond_mesh";
    }
    return "?";
}

GraphFamily graph_family_from_name(std::string_view name) {
    for (const auto f : {GraphFamily::layered, GraphFamily::chain, GraphFamily::fork_join, GraphFamily::diamond_mesh})
        if (family_name(f) == name)
            return f;
    throw UsageError(fmt::format("unknown graph family '{}'", name));
}

void GeneratorSpec::validate() const {
    if (layers.lo < 1 || layers.hi < layers.lo)
        throw UsageError(fmt::format("degenerate layer range [{}, {}]", layers.lo, layers.hi));
    if (family != GraphFamily::chain && (width.lo < 1 || width.hi < width.lo))
        throw UsageError(fmt::format("degenerate width range [{}, {}]", width.lo, width.hi));
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
        throw UsageError("edge_prob must lie in [0, 1]");
    if (types.empty() || durations.empty())
        throw UsageError("type and duration distributions must be non-empty");
    for (const auto &[type, w] : types) {
        if (!(w > 0.0))
            throw UsageError(fmt::format("type '{}' needs a positive weight", type));
        if (!capacities.contains(type))
            throw UsageError(fmt::format("type '{}' has no capacity", type));
    }
    for (const auto &[d, w] : durations)
        if (d < 1 || !(w > 0.0))
            throw UsageError("durations must be >= 1 with positive weights");
}

namespace {

template <typename T>
const T &weighted_pick(Rng &rng, const std::vector<std::pair<T, double>> &options) {
    double total = 0.0;
    for (const auto &[value, w] : options)
        total += w;
    double x = rng.unit() * total;
    for (const auto &[value, w] : options) {
        if (x < w)
            return value;
        x -= w;
    }
    return options.back().first;
}

class Builder {
  public:
    Builder(const GeneratorSpec &spec, Rng &rng) : spec_(spec), rng_(rng) {}

    NodeId add() {
        const auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back({id, weighted_pick(rng_, spec_.types), weighted_pick(rng_, spec_.durations)});
        return id;
    }
    void link(NodeId u, NodeId v) { edges_.emplace_back(u, v); }

    Dag finish() { return Dag::create(std::move(nodes_), std::move(edges_), spec_.capacities); }

  private:
    const GeneratorSpec &spec_;
    Rng &rng_;
    std::vector<NodeRecord> nodes_;
    std::vector<Edge> edges_;
};

Dag generate_one(const GeneratorSpec &spec, Rng &rng) {
    Builder b(spec, rng);
    const int layers = rng.between(spec.layers.lo, spec.layers.hi);
    switch (spec.family) {
    case GraphFamily::chain: {
        NodeId prev = b.add();
        for (int i = 1; i < layers; ++i) {
            const NodeId v = b.add();
            b.link(prev, v);
            prev = v;
        }
        break;
    }
    case GraphFamily::layered: {
        std::vector<std::vector<NodeId>> layer(static_cast<std::size_t>(layers));
        for (int l = 0; l < layers; ++l) {
            const int width = rng.between(spec.width.lo, spec.width.hi);
            for (int i = 0; i < width; ++i)
                layer[static_cast<std::size_t>(l)].push_back(b.add());
        }
        for (std::size_t l = 1; l < layer.size(); ++l) {
            for (const NodeId v : layer[l]) {
                bool linked = false;
                for (const NodeId u : layer[l - 1]) {
                    if (rng.chance(spec.edge_prob)) {
                        b.link(u, v);
                        linked = true;
                    }
                }
                if (!linked)
                    b.link(layer[l - 1][rng.below(layer[l - 1].size())], v);
                if (l >= 2)
                    for (const NodeId u : layer[l - 2])
                        if (rng.chance(spec.edge_prob / 4.0))
                            b.link(u, v);
            }
        }
        break;
    }
    case GraphFamily::fork_join: {
        NodeId fork = b.add();
        for (int s = 0; s < layers; ++s) {
            const int width = rng.between(spec.width.lo, spec.width.hi);
            std::vector<NodeId> tails;
            for (int w = 0; w < width; ++w) {
                NodeId prev = fork;
                const int length = rng.between(1, 3);
                for (int k = 0; k < length; ++k) {
                    const NodeId v = b.add();
                    b.link(prev, v);
                    prev = v;
                }
                tails.push_back(prev);
            }
            const NodeId join = b.add();
            for (const NodeId t : tails)
                b.link(t, join);
            fork = join;
        }
        break;
    }
    case GraphFamily::diamond_mesh: {
        const int width = rng.between(spec.width.lo, spec.width.hi);
        std::vector<std::vector<NodeId>> grid(static_cast<std::size_t>(layers));
        for (auto &row : grid)
            for (int j = 0; j < width; ++j)
                row.push_back(b.add());
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            for (std::size_t j = 0; j < grid[i].size(); ++j) {
                b.link(grid[i][j], grid[i + 1][j]);
                if (j + 1 < grid[i].size())
                    b.link(grid[i][j], grid[i + 1][j + 1]);
            }
        break;
    }
    }
    return b.finish();
}

IntRange range_from_json(const json &v, const char *what) {
    if (v.is_number_integer())
        return {v.get<int>(), v.get<int>()};
    if (v.is_array() && v.size() == 2)
        return {v[0].get<int>(), v[1].get<int>()};
    throw FormatError(fmt::format("{} must be an integer or [lo, hi]", what));
}

} // namespace

std::vector<Dag> generate_suite(const GeneratorSpec &given, std::size_t count) {
    given.validate();
    // Draw in key order so a spec read back from JSON generates the same graphs.
    GeneratorSpec spec = given;
    std::sort(spec.types.begin(), spec.types.end());
    std::sort(spec.durations.begin(), spec.durations.end());
    Rng rng(spec.seed);
    std::vector<Dag> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(generate_one(spec, rng));
    return out;
}

GeneratorSpec contention_heavy_spec(std::uint64_t seed) {
    GeneratorSpec spec;
    spec.seed = seed;
    return spec;
}

ojson GeneratorSpec::to_json() const {
    ojson out;
    out["family"] = family_name(family);
    out["layers"] = {layers.lo, layers.hi};
    out["width"] = {width.lo, width.hi};
    out["edge_prob"] = edge_prob;
    ojson t = ojson::object();
    for (const auto &[name, w] : types)
        t[name] = w;
    out["types"] = std::move(t);
    ojson d = ojson::object();
    for (const auto &[dur, w] : durations)
        d[std::to_string(dur)] = w;
    out["durations"] = std::move(d);
    ojson caps = ojson::object();
    for (const auto &[name, c] : capacities)
        caps[name] = c;
    out["capacities"] = std::move(caps);
    out["seed"] = seed;
    return out;
}

GeneratorSpec GeneratorSpec::from_json(const json &doc) {
    if (!doc.is_object())
        throw FormatError("generator spec must be a JSON object");
    GeneratorSpec spec;
    try {
        if (doc.contains("family"))
            spec.family = graph_family_from_name(doc["family"].get<std::string>());
        if (doc.contains("layers"))
            spec.layers = range_from_json(doc["layers"], "layers");
        if (doc.contains("width"))
            spec.width = range_from_json(doc["width"], "width");
        spec.edge_prob = doc.value("edge_prob", spec.edge_prob);
        spec.seed = doc.value("seed", spec.seed);
        if (doc.contains("types")) {
            spec.types.clear();
            for (const auto &[name, w] : doc["types"].items())
                spec.types.emplace_back(name, w.get<double>());
        }
        if (doc.contains("durations")) {
            spec.durations.clear();
            for (const auto &[name, w] : doc["durations"].items())
                spec.durations.emplace_back(std::stoi(name), w.get<double>());
            std::sort(spec.durations.begin(), spec.durations.end());
        }
        if (doc.contains("capacities"))
            spec.capacities = doc["capacities"].get<std::map<std::string, int>>();
    } catch (const json::exception &e) {
        throw FormatError(fmt::format("malformed generator spec: {}", e.what()));
    } catch (const std::invalid_argument &) {
        throw FormatError("duration keys must be integers");
    }
    return spec;
}

StatsSummary summarize(std::span<const double> values) {
    if (values.empty())
        throw UsageError("cannot summarize an empty list");
    StatsSummary s;
    s.n = values.size();
    for (const double v : values)
        s.mean += v;
    s.mean /= static_cast<double>(s.n);
    if (s.n == 1) {
        s.std_defined = false;
        return s;
    }
    double ss = 0.0;
    for (const double v : values)
        ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.ci95 = ci95_multiplier * s.std / std::sqrt(static_cast<double>(s.n));
    return s;
}

const CampaignRow *CampaignReport::row(std::string_view mode) const {
    for (const auto &r : rows)
        if (r.mode == mode)
            return &r;
    return nullptr;
}

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
}

CampaignRow evaluate_row(std::string mode, const PriorityExpr &heuristic, const GraphSet &validation,
                         const LoopConfig &config, const CampaignOptions &options) {
    CampaignRow row;
    row.mode = std::move(mode);
    row.heuristic = print_expr(heuristic);
    std::vector<double> latencies;
    for (std::size_t g = 0; g < validation.size(); ++g) {
        std::vector<double> times;
        Schedule s;
        for (int r = 0; r < std::max(1, options.timing_repeats); ++r) {
            s = list_schedule(validation.graphs[g], validation.stats[g], heuristic, config.runtime_mode);
            times.push_back(s.runtime_ms);
        }
        const auto violations = verify_schedule(validation.graphs[g], s);
        if (!violations.empty())
            throw InvariantError(fmt::format("{} schedule for {} fails verification: {}", row.mode,
                                             validation.names[g], violations.front().message));
        row.latencies.push_back(s.makespan);
        row.runtimes_ms.push_back(median(std::move(times)));
        latencies.push_back(s.makespan);
    }
    row.latency = summarize(latencies);
    return row;
}

double mean_of(const std::vector<double> &xs) {
    double sum = 0.0;
    for (const double x : xs)
        sum += x;
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

ojson summary_to_json(const StatsSummary &s) {
    ojson out;
    out["n"] = s.n;
    out["mean"] = s.mean;
    out["std"] = s.std;
    out["ci95"] = s.ci95;
    out["std_defined"] = s.std_defined;
    return out;
}

} // namespace

CampaignReport run_campaign(const GraphSet &train, const GraphSet &validation, const KernelLibrary *library,
                            std::span<const Ablation> modes, const LoopConfig &config,
                            const CampaignOptions &options) {
    if (validation.empty())
        throw UsageError("campaign needs a non-empty validation set");
    CampaignReport report;
    report.seed = config.seed;
    report.runtime_mode = config.runtime_mode == RuntimeMode::zero ? "zero" : "wallclock";
    report.graphs = validation.names;
    report.rows.push_back(evaluate_row("baseline", baseline_priority(), validation, config, options));
    const double base_time = mean_of(report.rows.front().runtimes_ms);

    for (const Ablation mode : modes) {
        LoopConfig cfg = config;
        cfg.ablation = mode;
        if (mode != Ablation::no_retrieval && mode != Ablation::no_motif && (!library || library->kernels.empty()))
            throw UsageError(fmt::format("mode '{}' needs a kernel library", ablation_name(mode)));
        auto provider = make_provider(cfg.provider);
        LoopResult loop = run_loop(train, validation, library, cfg, *provider);
        CampaignRow row = evaluate_row(std::string(ablation_name(mode)), loop.best, validation, cfg, options);
        if (base_time > 0.0)
            row.runtime_ratio = mean_of(row.runtimes_ms) / base_time;
        report.rows.push_back(std::move(row));
        report.loops.push_back(std::move(loop));
    }
    return report;
}

ojson CampaignReport::to_json() const {
    ojson out;
    ojson meta;
    meta["seed"] = seed;
    meta["runtime_mode"] = runtime_mode;
    meta["ci_multiplier"] = ci95_multiplier;
    meta["ci_method"] = "normal approximation, n = number of validation graphs";
    out["meta"] = std::move(meta);
    out["graphs"] = graphs;
    ojson rs = ojson::array();
    for (const auto &r : rows) {
        ojson row;
        row["mode"] = r.mode;
        row["heuristic"] = r.heuristic;
        row["latencies"] = r.latencies;
        row["runtimes_ms"] = r.runtimes_ms;
        row["summary"] = summary_to_json(r.latency);
        row["runtime_ratio"] = r.runtime_ratio ? ojson(*r.runtime_ratio) : ojson(nullptr);
        rs.push_back(std::move(row));
    }
    out["rows"] = std::move(rs);
    return out;
}

CampaignReport CampaignReport::from_json(const json &doc) {
    CampaignReport report;
    try {
        report.seed = doc.at("meta").at("seed").get<std::uint64_t>();
        report.runtime_mode = doc.at("meta").at("runtime_mode").get<std::string>();
        report.graphs = doc.at("graphs").get<std::vector<std::string>>();
        for (const auto &jr : doc.at("rows")) {
            CampaignRow row;
            row.mode = jr.at("mode").get<std::string>();
            row.heuristic = jr.at("heuristic").get<std::string>();
            row.latencies = jr.at("latencies").get<std::vector<int>>();
            row.runtimes_ms = jr.at("runtimes_ms").get<std::vector<double>>();
            if (row.latencies.size() != report.graphs.size() || row.runtimes_ms.size() != report.graphs.size())
                throw FormatError(fmt::format("row '{}' does not cover every graph", row.mode));
            std::vector<double> lat(row.latencies.begin(), row.latencies.end());
            row.latency = summarize(lat);
            if (!jr.at("runtime_ratio").is_null())
                row.runtime_ratio = jr["runtime_ratio"].get<double>();
            report.rows.push_back(std::move(row));
        }
    } catch (const json::exception &e) {
        throw FormatError(fmt::format("malformed campaign report: {}", e.what()));
    } catch (const UsageError &e) {
        throw FormatError(fmt::format("malformed campaign report: {}", e.what()));
    }
    return report;
}

std::string CampaignReport::to_text() const {
    std::size_t name_width = 5;
    for (const auto &g : graphs)
        name_width = std::max(name_width, g.size());
    std::vector<std::size_t> widths;
    for (const auto &r : rows)
        widths.push_back(std::max<std::size_t>(r.mode.size(), 22));

    std::string out = fmt::format("{:<{}}", "graph", name_width);
    for (std::size_t c = 0; c < rows.size(); ++c)
        out += fmt::format("  {:>{}}", rows[c].mode, widths[c]);
    out += "\n";
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        out += fmt::format("{:<{}}", graphs[g], name_width);
        for (std::size_t c = 0; c < rows.size(); ++c)
            out += fmt::format("  {:>{}}", rows[c].latencies[g], widths[c]);
        out += "\n";
    }
    const auto summary_line = [&](std::string_view label, auto cell) {
        out += fmt::format("{:<{}}", label, name_width);
        for (std::size_t c = 0; c < rows.size(); ++c)
            out += fmt::format("  {:>{}}", cell(rows[c]), widths[c]);
        out += "\n";
    };
    summary_line("avg", [](const CampaignRow &r) {
        return fmt::format("{:.2f} (± {:.2f}){}", r.latency.mean, r.latency.std, r.latency.std_defined ? "" : "*");
    });
    summary_line("ci95", [](const CampaignRow &r) { return fmt::format("± {:.2f}", r.latency.ci95); });
    summary_line("rt_ratio", [](const CampaignRow &r) {
        if (r.mode == "baseline")
            return std::string("1.00");
        return r.runtime_ratio ? fmt::format("{:.2f}", *r.runtime_ratio) : std::string("n/a");
    });
    out += "\n";
    for (const auto &r : rows)
        out += fmt::format("{}: {}\n", r.mode, r.heuristic);
    return out;
}

std::string CampaignReport::to_csv() const {
    std::string out = "graph,mode,latency,runtime_ms\n";
    for (const auto &r : rows)
        for (std::size_t g = 0; g < graphs.size(); ++g)
            out += fmt::format("{},{},{},{}\n", graphs[g], r.mode, r.latencies[g], r.runtimes_ms[g]);
    return out;
}

} // namespace kernsched
