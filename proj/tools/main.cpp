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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "kernsched/bench.hpp"
#include "kernsched/motifs.hpp"
#include "kernsched/retrieval.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace ks = kernsched;

namespace {

constexpr const char *tool_version = "0.1.0";

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ks::UsageError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ks::UsageError(fmt::format("cannot write '{}'", path.string()));
    out << text;
}

json read_json(const fs::path &path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error &e) {
        throw ks::FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string sha256_hex(const std::string &bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw ks::InvariantError("SHA-256 digest failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
        out += fmt::format("{:02x}", digest[i]);
    return out;
}

/// Provenance record written next to every artifact. No environment values.
class Manifest {
  public:
    explicit Manifest(std::string command) : command_(std::move(command)) {}

    void config(const fs::path &path) { config_ = path.string(); }
    void seed(std::uint64_t s) { seed_ = s; }
    void input(const fs::path &path) {
        if (fs::is_directory(path)) {
            for (const auto &f : json_files(path))
                inputs_.emplace_back(f.string(), sha256_hex(read_text(f)));
        } else {
            inputs_.emplace_back(path.string(), sha256_hex(read_text(path)));
        }
    }
    void output(const fs::path &path) { outputs_.push_back(path.filename().string()); }
    void generator(ojson spec) { generator_ = std::move(spec); }

    void write(const fs::path &dir) const {
        ojson m;
        m["tool"] = "kernsched";
        m["version"] = tool_version;
        m["command"] = command_;
        m["config"] = config_.empty() ? ojson(nullptr) : ojson(config_);
        m["seed"] = seed_ ? ojson(*seed_) : ojson(nullptr);
        ojson in = ojson::array();
        for (const auto &[path, digest] : inputs_)
            in.push_back({{"path", path}, {"sha256", digest}});
        m["inputs"] = std::move(in);
        m["output_dir"] = dir.string();
        m["outputs"] = outputs_;
        if (!generator_.is_null())
            m["generator"] = generator_;
        write_text(dir / "manifest.json", m.dump(2) + "\n");
    }

    static std::vector<fs::path> json_files(const fs::path &dir) {
        std::vector<fs::path> files;
        for (const auto &entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json" &&
                entry.path().filename() != "manifest.json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        return files;
    }

  private:
    std::string command_;
    std::string config_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::string> outputs_;
    ojson generator_;
};

ks::GraphSet load_graph_dir(const fs::path &dir) {
    if (!fs::is_directory(dir))
        throw ks::UsageError(fmt::format("'{}' is not a directory", dir.string()));
    ks::GraphSet set;
    for (const auto &f : Manifest::json_files(dir))
        set.add(f.stem().string(), ks::load_dag_file(f));
    if (set.empty())
        throw ks::UsageError(fmt::format("no graph files in '{}'", dir.string()));
    return set;
}

/// A suite reference in a run config: a directory path (relative to the
/// config file) or {"generator": {...}, "count": n}.
ks::GraphSet resolve_suite(const json &ref, const fs::path &base, std::string_view prefix, Manifest &manifest) {
    if (ref.is_string()) {
        const fs::path dir = base / ref.get<std::string>();
        manifest.input(dir);
        return load_graph_dir(dir);
    }
    if (ref.is_object() && ref.contains("generator")) {
        const auto spec = ks::GeneratorSpec::from_json(ref["generator"]);
        const auto count = ref.value("count", std::size_t{50});
        return ks::GraphSet::from_graphs(ks::generate_suite(spec, count), prefix);
    }
    throw ks::FormatError(fmt::format("suite '{}' must be a directory or a generator object", prefix));
}

ks::MotifConfig motif_config_from_json(const json &doc, std::size_t budget) {
    ks::MotifConfig mc;
    mc.library_budget = budget;
    if (!doc.is_object())
        return mc;
    mc.hops = doc.value("hops", mc.hops);
    mc.chain_min_length = doc.value("chain_min_length", mc.chain_min_length);
    mc.centrality_fraction = doc.value("centrality_fraction", mc.centrality_fraction);
    mc.cluster_threshold = doc.value("cluster_threshold", mc.cluster_threshold);
    return mc;
}

struct RunSetup {
    ks::LoopConfig config;
    ks::GraphSet train;
    ks::GraphSet validation;
    std::optional<ks::KernelLibrary> library;
    json doc;
};

struct RunOverrides {
    std::string provider;
    std::optional<std::uint64_t> seed;
    bool zero_runtime = false;
    unsigned jobs = 0;
};

RunSetup load_run(const fs::path &config_path, const RunOverrides &ov, Manifest &manifest) {
    RunSetup run;
    run.doc = read_json(config_path);
    manifest.config(config_path);
    manifest.input(config_path);
    if (run.doc.contains("provider") && run.doc["provider"].is_object() &&
        run.doc["provider"].contains("token"))
        throw ks::UsageError("provider tokens belong in the environment, not the run config");
    run.config = ks::loop_config_from_json(run.doc);
    if (!ov.provider.empty())
        run.config.provider.kind = ov.provider;
    if (ov.seed)
        run.config.seed = *ov.seed;
    if (ov.zero_runtime)
        run.config.runtime_mode = ks::RuntimeMode::zero;
    if (ov.jobs > 0)
        run.config.jobs = ov.jobs;
    run.config.validate();
    manifest.seed(run.config.seed);

    const fs::path base = config_path.parent_path();
    if (!run.doc.contains("train") || !run.doc.contains("validation"))
        throw ks::FormatError("run config needs 'train' and 'validation' suites");
    run.train = resolve_suite(run.doc["train"], base, "train", manifest);
    run.validation = resolve_suite(run.doc["validation"], base, "val", manifest);

    if (run.doc.contains("library") && run.doc["library"].is_string()) {
        const fs::path lib = base / run.doc["library"].get<std::string>();
        manifest.input(lib);
        run.library = ks::KernelLibrary::load(lib);
    } else {
        const auto mc = motif_config_from_json(run.doc.value("motifs", json::object()), run.config.library_budget);
        const auto vocab = ks::TypeVocabulary::from_graphs(run.train.graphs);
        run.library = ks::build_library(run.train.graphs, mc, vocab);
    }
    return run;
}

ks::PriorityExpr resolve_heuristic(const std::string &inline_text, const std::string &file) {
    // Inline text wins when both are given.
    if (!inline_text.empty()) {
        if (auto named = ks::named_policy(inline_text))
            return *named;
        return ks::parse_expr(inline_text);
    }
    if (!file.empty()) {
        const auto exprs = ks::load_heuristic_file(file);
        if (exprs.empty())
            throw ks::FormatError(fmt::format("'{}' holds no expression", file));
        return exprs.front();
    }
    throw ks::UsageError("give --heuristic or --heuristic-file");
}

void emit(const std::string &text, const std::string &out, Manifest *manifest) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    const fs::path path(out);
    write_text(path, text);
    if (manifest) {
        manifest->output(path);
        manifest->write(path.has_parent_path() ? path.parent_path() : fs::path("."));
    }
}

ojson stats_json(const ks::Dag &dag, const ks::GraphStats &st) {
    ojson out;
    out["nodes"] = dag.size();
    out["edges"] = dag.edges().size();
    out["critical_path"] = st.critical_path;
    out["lower_bound"] = ks::makespan_lower_bound(dag, st);
    ojson pressure = ojson::object();
    for (const auto &[t, p] : st.pressure)
        pressure[t] = p;
    out["pressure"] = std::move(pressure);
    ojson per = ojson::array();
    for (ks::NodeId v = 0; v < static_cast<ks::NodeId>(dag.size()); ++v) {
        const auto n = st.node(dag, v);
        ojson row;
        row["id"] = v;
        row["type"] = dag.node(v).op_type;
        row["duration"] = dag.node(v).duration;
        row["level"] = n.level;
        row["crit"] = n.crit;
        row["slack"] = n.slack;
        row["fanin"] = n.fanin;
        row["fanout"] = n.fanout;
        row["reconv"] = n.reconv;
        per.push_back(std::move(row));
    }
    out["per_node"] = std::move(per);
    return out;
}

std::vector<ks::Ablation> parse_modes(const std::string &text) {
    std::vector<ks::Ablation> modes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            modes.push_back(ks::ablation_from_name(item));
    if (modes.empty())
        throw ks::UsageError("no ablation modes given");
    return modes;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Structural-kernel retrieval and priority synthesis for resource-constrained list scheduling"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);
    unsigned jobs = 0;
    app.add_option("--jobs", jobs, "Worker thread cap (0 = config value)");

    // gen
    auto *gen = app.add_subcommand("gen", "Generate a seeded graph suite");
    std::string gen_spec, gen_out, gen_family;
    std::size_t gen_count = 10;
    std::optional<std::uint64_t> gen_seed;
    std::optional<int> gen_layers, gen_width;
    gen->add_option("--spec", gen_spec, "Generator spec JSON")->check(CLI::ExistingFile);
    gen->add_option("--family", gen_family, "layered | chain | fork_join | diamond_mesh");
    gen->add_option("--layers", gen_layers, "Fixed layer count");
    gen->add_option("--width", gen_width, "Fixed layer width");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--count", gen_count, "Number of graphs")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Output directory")->required();

    // stats
    auto *stats = app.add_subcommand("stats", "Per-graph structural statistics");
    std::string stats_graph, stats_out;
    stats->add_option("--graph", stats_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
    stats->add_option("--out", stats_out, "Write JSON here instead of stdout");

    // kernels build
    auto *kernels = app.add_subcommand("kernels", "Kernel library commands");
    kernels->require_subcommand(1);
    auto *kbuild = kernels->add_subcommand("build", "Mine and cluster motifs into a kernel library");
    std::string kb_train, kb_out;
    ks::MotifConfig kb_cfg;
    kbuild->add_option("--train", kb_train, "Directory of training graphs")->required()->check(CLI::ExistingDirectory);
    kbuild->add_option("--out", kb_out, "Library JSON path")->required();
    kbuild->add_option("--hops", kb_cfg.hops, "Neighborhood radius k")->capture_default_str();
    kbuild->add_option("--threshold", kb_cfg.cluster_threshold, "Cluster similarity threshold")->capture_default_str();
    kbuild->add_option("--budget", kb_cfg.library_budget, "Kernel budget")->capture_default_str();

    // retrieve
    auto *retrieve = app.add_subcommand("retrieve", "Top-m kernels for a graph");
    std::string rt_graph, rt_lib;
    std::size_t rt_m = 5;
    retrieve->add_option("--graph", rt_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--library", rt_lib, "Kernel library JSON")->required()->check(CLI::ExistingFile);
    retrieve->add_option("-m,--top", rt_m, "Number of kernels")->capture_default_str();

    // schedule
    auto *schedule = app.add_subcommand("schedule", "Schedule one graph with a heuristic");
    std::string sc_graph, sc_heur, sc_file, sc_out;
    bool sc_zero = false;
    schedule->add_option("--graph", sc_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
    schedule->add_option("--heuristic", sc_heur, "Priority expression or policy name (wins over --heuristic-file)");
    schedule->add_option("--heuristic-file", sc_file, "File whose first expression is used")->check(CLI::ExistingFile);
    schedule->add_flag("--zero-runtime", sc_zero, "Report scheduling time as 0");
    schedule->add_option("--out", sc_out, "Write JSON here instead of stdout");

    // synthesize
    auto *synth = app.add_subcommand("synthesize", "Run the synthesis loop");
    std::string sy_config, sy_out = "run";
    RunOverrides sy_ov;
    synth->add_option("--config", sy_config, "Run config JSON")->required()->check(CLI::ExistingFile);
    synth->add_option("--provider", sy_ov.provider, "fallback | http | scripted (overrides config)");
    synth->add_option("--seed", sy_ov.seed, "Override the config seed");
    synth->add_flag("--zero-runtime", sy_ov.zero_runtime, "Report scheduling time as 0");
    synth->add_option("--out", sy_out, "Output directory")->capture_default_str();

    // ablate
    auto *ablate = app.add_subcommand("ablate", "Run an ablation campaign");
    std::string ab_config, ab_out = "campaign", ab_modes = "full,no_retrieval,no_motif,random_kernel";
    RunOverrides ab_ov;
    ablate->add_option("--config", ab_config, "Run config JSON")->required()->check(CLI::ExistingFile);
    ablate->add_option("--modes", ab_modes, "Comma-separated ablation modes")->capture_default_str();
    ablate->add_option("--provider", ab_ov.provider, "fallback | http | scripted (overrides config)");
    ablate->add_option("--seed", ab_ov.seed, "Override the config seed");
    ablate->add_flag("--zero-runtime", ab_ov.zero_runtime, "Report scheduling time as 0");
    ablate->add_option("--out", ab_out, "Output directory")->capture_default_str();

    // report
    auto *report = app.add_subcommand("report", "Summaries from stored campaign or history files");
    std::string rp_input, rp_format = "text";
    report->add_option("--input", rp_input, "report.json or history.json")->required()->check(CLI::ExistingFile);
    report->add_option("--format", rp_format, "text | csv | json")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ks::ErrorKind::usage);
    }

    try {
        if (gen->parsed()) {
            ks::GeneratorSpec spec;
            Manifest manifest("gen");
            if (!gen_spec.empty()) {
                spec = ks::GeneratorSpec::from_json(read_json(gen_spec));
                manifest.config(gen_spec);
                manifest.input(gen_spec);
            }
            if (!gen_family.empty())
                spec.family = ks::graph_family_from_name(gen_family);
            if (gen_layers)
                spec.layers = {*gen_layers, *gen_layers};
            if (gen_width)
                spec.width = {*gen_width, *gen_width};
            if (gen_seed)
                spec.seed = *gen_seed;
            manifest.seed(spec.seed);
            const auto graphs = ks::generate_suite(spec, gen_count);
            const fs::path dir(gen_out);
            fs::create_directories(dir);
            for (std::size_t i = 0; i < graphs.size(); ++i) {
                const auto path = dir / fmt::format("g_{:04}.json", i);
                ks::save_dag_file(graphs[i], path);
                manifest.output(path);
            }
            manifest.generator(spec.to_json());
            manifest.write(dir);
        } else if (stats->parsed()) {
            const auto dag = ks::load_dag_file(stats_graph);
            Manifest manifest("stats");
            manifest.input(stats_graph);
            emit(stats_json(dag, ks::analyze(dag)).dump(2) + "\n", stats_out, &manifest);
        } else if (kbuild->parsed()) {
            Manifest manifest("kernels build");
            manifest.input(kb_train);
            const auto train = load_graph_dir(kb_train);
            const auto vocab = ks::TypeVocabulary::from_graphs(train.graphs);
            const auto lib = ks::build_library(train.graphs, kb_cfg, vocab);
            emit(lib.dump(), kb_out, &manifest);
            std::cerr << fmt::format("{} kernels from {} graphs\n", lib.kernels.size(), train.size());
        } else if (retrieve->parsed()) {
            const auto dag = ks::load_dag_file(rt_graph);
            const auto lib = ks::KernelLibrary::load(rt_lib);
            const auto hits = ks::retrieve_topm(lib.query(dag, ks::analyze(dag)), lib.kernels, rt_m);
            ojson out = ojson::array();
            for (const auto &h : hits) {
                const auto &k = lib.kernels[h.index];
                out.push_back({{"id", h.id},
                               {"similarity", h.similarity},
                               {"category", ks::category_name(k.category)},
                               {"template", ks::print_expr(ks::instantiate_defaults(k.tmpl))}});
            }
            std::cout << out.dump(2) << "\n";
        } else if (schedule->parsed()) {
            const auto dag = ks::load_dag_file(sc_graph);
            const auto expr = resolve_heuristic(sc_heur, sc_file);
            const auto st = ks::analyze(dag);
            const auto s = ks::list_schedule(dag, st, expr, sc_zero ? ks::RuntimeMode::zero : ks::RuntimeMode::wallclock);
            const auto violations = ks::verify_schedule(dag, s);
            if (!violations.empty())
                throw ks::InvariantError(violations.front().message);
            auto doc = ks::schedule_to_json(s);
            doc["heuristic"] = ks::print_expr(expr);
            Manifest manifest("schedule");
            manifest.input(sc_graph);
            if (!sc_file.empty())
                manifest.input(sc_file);
            emit(doc.dump(2) + "\n", sc_out, &manifest);
        } else if (synth->parsed()) {
            Manifest manifest("synthesize");
            sy_ov.jobs = jobs;
            auto run = load_run(sy_config, sy_ov, manifest);
            auto provider = ks::make_provider(run.config.provider);
            const auto result = ks::run_loop(run.train, run.validation, &*run.library, run.config, *provider);
            const fs::path dir(sy_out);
            write_text(dir / "history.json", ks::history_to_json(result, run.config).dump(2) + "\n");
            manifest.output(dir / "history.json");
            manifest.write(dir);
            std::cout << fmt::format("best: {} (iteration {}, mean score {:.4f})\n", ks::print_expr(result.best),
                                     result.best_iteration, result.best_mean_score);
        } else if (ablate->parsed()) {
            Manifest manifest("ablate");
            ab_ov.jobs = jobs;
            auto run = load_run(ab_config, ab_ov, manifest);
            const auto modes = parse_modes(ab_modes);
            const auto rep = ks::run_campaign(run.train, run.validation, &*run.library, modes, run.config);
            const fs::path dir(ab_out);
            write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
            write_text(dir / "report.txt", rep.to_text());
            write_text(dir / "report.csv", rep.to_csv());
            for (const char *name : {"report.json", "report.txt", "report.csv"})
                manifest.output(dir / name);
            manifest.write(dir);
            std::cout << rep.to_text();
        } else if (report->parsed()) {
            const auto doc = read_json(rp_input);
            if (doc.contains("rows")) {
                const auto rep = ks::CampaignReport::from_json(doc);
                if (rp_format == "csv")
                    std::cout << rep.to_csv();
                else if (rp_format == "json")
                    std::cout << rep.to_json().dump(2) << "\n";
                else
                    std::cout << rep.to_text();
            } else if (doc.contains("iterations") && doc.contains("best")) {
                json rows = json::array();
                std::string text = "iteration  mean_score  heuristic\n";
                for (const auto &it : doc["iterations"]) {
                    const double ms = it.at("evaluation").at("mean_score").get<double>();
                    text += fmt::format("{:>9}  {:>10.3f}  {}\n", it.at("iteration").get<int>(), ms,
                                        it.at("heuristic").get<std::string>());
                    rows.push_back({{"iteration", it["iteration"]}, {"mean_score", ms}, {"heuristic", it["heuristic"]}});
                }
                text += fmt::format("best: {} (iteration {})\n", doc["best"].at("heuristic").get<std::string>(),
                                    doc["best"].at("iteration").get<int>());
                if (rp_format == "json")
                    std::cout << json{{"iterations", rows}, {"best", doc["best"]}}.dump(2) << "\n";
                else if (rp_format == "csv") {
                    std::cout << "iteration,mean_score,heuristic\n";
                    for (const auto &r : rows)
                        std::cout << fmt::format("{},{},\"{}\"\n", r["iteration"].get<int>(),
                                                 r["mean_score"].get<double>(), r["heuristic"].get<std::string>());
                } else
                    std::cout << text;
            } else {
                throw ks::FormatError(fmt::format("'{}' is neither a campaign report nor a history", rp_input));
            }
        }
    } catch (const ks::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const json::exception &e) {
        std::cerr << "error: malformed document: " << e.what() << "\n";
        return static_cast<int>(ks::ErrorKind::format);
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ks::ErrorKind::usage);
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return static_cast<int>(ks::ErrorKind::invariant);
    }
    return 0;
}
