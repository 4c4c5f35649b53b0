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

#include <doctest.h>

#include "kernsched/bench.hpp"
#include "kernsched/motifs.hpp"
#include "support.hpp"

using namespace kernsched;
using namespace kernsched::testing;

namespace {

std::vector<Motif> of_category(const std::vector<Motif> &motifs, MotifCategory c) {
    std::vector<Motif> out;
    for (const auto &m : motifs)
        if (m.category == c)
            out.push_back(m);
    return out;
}

Motif motif_with(MotifCategory c, Vector embedding) {
    Motif m;
    m.category = c;
    m.nodes = {0};
    m.embedding = std::move(embedding);
    return m;
}

} // namespace

TEST_CASE("chain motifs") {
    const Dag c6 = chain(6);
    const TypeVocabulary vocab({"add"});
    const auto motifs = mine_motifs(c6, analyze(c6), MotifConfig{}, vocab);
    const auto chains = of_category(motifs, MotifCategory::chain);
    REQUIRE(chains.size() == 1);
    CHECK(chains[0].nodes == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(of_category(motifs, MotifCategory::khop).size() == 6);
    CHECK(of_category(motifs, MotifCategory::reconvergent).empty());

    // k-hop ball of node 2 with k=2 covers 0..4
    CHECK(of_category(motifs, MotifCategory::khop)[2].nodes == std::vector<NodeId>{0, 1, 2, 3, 4});
}

TEST_CASE("reconvergent motif of a diamond") {
    const Dag d = diamond(1);
    const auto motifs = mine_motifs(d, analyze(d), MotifConfig{}, TypeVocabulary({"add"}));
    const auto rec = of_category(motifs, MotifCategory::reconvergent);
    REQUIRE(rec.size() == 1);
    CHECK(rec[0].anchor == 0);
    CHECK(rec[0].nodes == std::vector<NodeId>{0, 1, 2, 3});
}

TEST_CASE("two node graph has no chain or reconvergent motif") {
    const Dag g = chain(2);
    const auto motifs = mine_motifs(g, analyze(g), MotifConfig{}, TypeVocabulary({"add"}));
    CHECK(of_category(motifs, MotifCategory::chain).empty());
    CHECK(of_category(motifs, MotifCategory::reconvergent).empty());
    CHECK_FALSE(of_category(motifs, MotifCategory::khop).empty());
}

TEST_CASE("motif order and connectivity") {
    Rng rng(21);
    for (int t = 0; t < 30; ++t) {
        const Dag dag = random_dag(rng, rng.between(2, 14), 0.25);
        const auto motifs = mine_motifs(dag, analyze(dag), MotifConfig{}, TypeVocabulary({"alu", "mem"}));
        for (std::size_t i = 1; i < motifs.size(); ++i) {
            const auto a = std::make_pair(static_cast<int>(motifs[i - 1].category), motifs[i - 1].anchor);
            const auto b = std::make_pair(static_cast<int>(motifs[i].category), motifs[i].anchor);
            CHECK(a <= b);
        }
        for (const auto &m : motifs) {
            REQUIRE(!m.nodes.empty());
            CHECK(std::is_sorted(m.nodes.begin(), m.nodes.end()));
            // weakly connected: flood fill over undirected induced edges
            const Dag sub = induced_subgraph(dag, m.nodes);
            std::vector<std::vector<NodeId>> adj(sub.size());
            for (const auto &[u, v] : sub.edges()) {
                adj[static_cast<std::size_t>(u)].push_back(v);
                adj[static_cast<std::size_t>(v)].push_back(u);
            }
            std::vector<bool> seen(sub.size(), false);
            std::vector<NodeId> stack{0};
            seen[0] = true;
            std::size_t count = 1;
            while (!stack.empty()) {
                const NodeId u = stack.back();
                stack.pop_back();
                for (const NodeId w : adj[static_cast<std::size_t>(u)])
                    if (!seen[static_cast<std::size_t>(w)]) {
                        seen[static_cast<std::size_t>(w)] = true;
                        ++count;
                        stack.push_back(w);
                    }
            }
            CHECK(count == sub.size());
            CHECK(m.embedding.size() == embedding_dim(TypeVocabulary({"alu", "mem"})));
        }
    }
}

TEST_CASE("leader clustering") {
    std::vector<Motif> same(10, motif_with(MotifCategory::khop, {1, 2, 3}));
    const auto one = cluster_motifs(same, 0.95, 50);
    REQUIRE(one.size() == 1);
    CHECK(one[0].support == 10);
    CHECK(one[0].signature == Vector{1, 2, 3});
    CHECK(one[0].tmpl.family == TemplateFamily::resource_aware);

    const std::vector<Motif> ortho{motif_with(MotifCategory::khop, {1, 0}), motif_with(MotifCategory::khop, {0, 1})};
    CHECK(cluster_motifs(ortho, 0.95, 50).size() == 2);

    // same embedding in two categories never merges
    const std::vector<Motif> cats{motif_with(MotifCategory::chain, {1, 0}),
                                  motif_with(MotifCategory::reconvergent, {1, 0})};
    const auto two = cluster_motifs(cats, 0.95, 50);
    REQUIRE(two.size() == 2);
    CHECK(two[0].tmpl.family == TemplateFamily::reconvergent_A);
    CHECK(two[1].tmpl.family == TemplateFamily::deep_chain_B);

    CHECK_THROWS_AS(cluster_motifs(std::vector<Motif>{}, 0.95, 50), UsageError);
    CHECK_THROWS_AS(cluster_motifs(same, 0.0, 50), UsageError);
}

TEST_CASE("budget keeps the best supported clusters") {
    std::vector<Motif> motifs;
    for (int i = 0; i < 3; ++i)
        motifs.push_back(motif_with(MotifCategory::khop, {1, 0, 0}));
    motifs.push_back(motif_with(MotifCategory::khop, {0, 1, 0}));
    for (int i = 0; i < 2; ++i)
        motifs.push_back(motif_with(MotifCategory::khop, {0, 0, 1}));
    const auto kept = cluster_motifs(motifs, 0.95, 2);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == 0);
    CHECK(kept[0].support == 3);
    CHECK(kept[1].id == 1);
    CHECK(kept[1].support == 2);
}

TEST_CASE("template instantiation") {
    const auto a = TemplateSpec::defaults_for(TemplateFamily::reconvergent_A);
    CHECK(print_expr(instantiate_template(a, {{"alpha1", 1}, {"alpha2", 1}, {"alpha3", 1}})) ==
          "1*crit + 1*fanout + 1*reconv");
    const auto b = TemplateSpec::defaults_for(TemplateFamily::deep_chain_B);
    CHECK(print_expr(instantiate_template(b, {{"beta1", 1}, {"beta2", 0}})) == "1*crit");
    CHECK(print_expr(instantiate_defaults(b)) == "1*crit - 1*slack");
    const auto f = TemplateSpec::defaults_for(TemplateFamily::fanout_aware);
    CHECK(print_expr(instantiate_template(f, {{"w1", 1}, {"w2", 0}})) == "1*fanout");
    const auto r = TemplateSpec::defaults_for(TemplateFamily::resource_aware);
    CHECK(print_expr(instantiate_defaults(r)) == "1*crit + 1*pressure");

    CHECK_THROWS_AS(instantiate_template(a, {{"alpha1", 9}}), UsageError);
    CHECK_THROWS_AS(instantiate_template(a, {{"gamma", 1}}), UsageError);
    CHECK_THROWS_AS(instantiate_template(b, {{"beta1", 0}, {"beta2", 0}}), UsageError);
    CHECK_FALSE(family_from_name("nope").has_value());
}

TEST_CASE("library build is deterministic and round-trips") {
    GeneratorSpec spec;
    spec.seed = 5;
    const auto train = generate_suite(spec, 12);
    const auto vocab = TypeVocabulary::from_graphs(train);
    const auto lib = build_library(train, MotifConfig{}, vocab);
    CHECK(!lib.kernels.empty());
    CHECK(lib.kernels.size() <= 50);
    CHECK(build_library(train, MotifConfig{}, vocab).dump() == lib.dump());
    for (std::size_t i = 0; i < lib.kernels.size(); ++i) {
        CHECK(lib.kernels[i].id == static_cast<int>(i));
        CHECK(lib.kernels[i].signature.size() == embedding_dim(vocab));
        CHECK(lib.kernels[i].support >= 1);
    }

    const auto back = KernelLibrary::from_json(lib.to_json());
    CHECK(back.kernels == lib.kernels);
    CHECK(back.vocab == lib.vocab);
    CHECK(back.dump() == lib.dump());

    auto bad = lib.to_json();
    bad["layout"] = "v9";
    CHECK_THROWS_AS(KernelLibrary::from_json(bad), FormatError);
    auto short_sig = lib.to_json();
    short_sig["kernels"][0]["signature"] = nlohmann::json::array({1.0});
    CHECK_THROWS_AS(KernelLibrary::from_json(short_sig), FormatError);
}

TEST_CASE("chain-only training yields a deep chain kernel") {
    std::vector<Dag> train;
    for (int n = 5; n < 10; ++n)
        train.push_back(chain(n));
    const auto lib = build_library(train, MotifConfig{}, TypeVocabulary::from_graphs(train));
    bool has_b = false;
    for (const auto &k : lib.kernels)
        has_b = has_b || k.tmpl.family == TemplateFamily::deep_chain_B;
    CHECK(has_b);
}

TEST_CASE("whole graph library for the no-motif ablation") {
    GeneratorSpec spec;
    spec.seed = 9;
    const auto train = generate_suite(spec, 20);
    const auto vocab = TypeVocabulary::from_graphs(train);
    std::vector<Vector> raw;
    for (const auto &g : train)
        raw.push_back(embed(g, vocab));
    const auto norm = Normalizer::fit(raw);
    const auto lib = whole_graph_library(train, vocab, norm, 50);
    CHECK(lib.kernels.size() == train.size());
    for (const auto &k : lib.kernels) {
        CHECK(k.category == MotifCategory::whole_graph);
        CHECK(k.tmpl.family == TemplateFamily::fanout_aware);
    }
    CHECK(whole_graph_library(train, vocab, norm, 7).kernels.size() == 7);
}
