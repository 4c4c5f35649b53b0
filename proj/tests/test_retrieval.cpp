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

#include <cmath>

#include "kernsched/embedding.hpp"
#include "kernsched/retrieval.hpp"
#include "support.hpp"

using namespace kernsched;
using namespace kernsched::testing;

namespace {

/// Reference: score everything, stable full sort, truncate.
std::vector<RetrievedKernel> full_sort_topm(std::span<const double> q, std::span<const Kernel> lib, std::size_t m) {
    std::vector<RetrievedKernel> all;
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const double sim = cosine_sim(q, lib[i].signature);
        all.push_back({i, lib[i].id, sim});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto &a, const auto &b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    });
    all.resize(std::min(m, all.size()));
    return all;
}

Vector random_vector(Rng &rng, std::size_t dim) {
    Vector v(dim);
    for (auto &x : v)
        x = static_cast<double>(rng.between(-4, 4)) / 2.0;
    return v;
}

} // namespace

TEST_CASE("embedding layout") {
    const TypeVocabulary vocab({"add"});
    CHECK(embedding_dim(vocab) == 21);

    const Dag single = make_dag({2}, {});
    const auto e = embed(single, vocab);
    REQUIRE(e.size() == 21);
    CHECK(e[0] == 2.0); // cp / |V|
    CHECK(e[1] == 1.0);
    CHECK(e[2] == 0.0);
    CHECK(e[3] == 1.0); // fanout bin 0
    CHECK(e[19] == 1.0); // type histogram

    const auto d = embed(diamond(1), vocab);
    CHECK(std::vector<double>(d.begin() + 3, d.begin() + 11) ==
          std::vector<double>{0.25, 0.5, 0.25, 0, 0, 0, 0, 0});
    // levels 0,1,1,2 over cp 3 land in bins 0, 2, 2, 5
    CHECK(std::vector<double>(d.begin() + 11, d.begin() + 19) ==
          std::vector<double>{0.25, 0, 0.5, 0, 0, 0.25, 0, 0});
    CHECK(d[20] == doctest::Approx(4.0 / 3.0));

    CHECK_THROWS_AS(embed(make_dag({1}, {}, 1, "mul"), vocab), UsageError);
}

TEST_CASE("fanout bins") {
    const std::vector<std::pair<int, std::size_t>> cases{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 4},
                                                         {6, 5}, {8, 5}, {9, 6}, {16, 6}, {17, 7}, {100, 7}};
    for (const auto &[deg, bin] : cases)
        CHECK(fanout_bin(deg) == bin);
}

TEST_CASE("embedding ignores node ids") {
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        const Dag dag = random_dag(rng, rng.between(1, 12), 0.3);
        std::vector<NodeId> perm(dag.size());
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = perm.size() - 1; k > 0; --k)
            std::swap(perm[k], perm[rng.below(k + 1)]);
        const TypeVocabulary vocab({"alu", "mem"});
        const auto a = embed(dag, vocab);
        const auto b = embed(permuted(dag, perm), vocab);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
}

TEST_CASE("normalizer") {
    const std::vector<Vector> train{{1, 5}, {2, 5}, {3, 5}};
    const auto norm = Normalizer::fit(train);
    CHECK(norm.apply({1, 5}) == Vector{-1, 0});
    CHECK(norm.apply({2, 5}) == Vector{0, 0});
    CHECK(norm.apply({3, 5}) == Vector{1, 0});
    CHECK_THROWS_AS(Normalizer::fit(std::vector<Vector>{{1.0}}), UsageError);

    const auto back = Normalizer::from_json(norm.to_json());
    CHECK(back.mean() == norm.mean());
    CHECK(back.stddev() == norm.stddev());
    CHECK(norm.to_json().at("layout") == "v1");
    auto wrong = norm.to_json();
    wrong["layout"] = "v0";
    CHECK_THROWS_AS(Normalizer::from_json(wrong), FormatError);

    Rng rng(2);
    std::vector<Vector> pts;
    for (int i = 0; i < 30; ++i)
        pts.push_back({rng.unit() * 10, rng.unit() - 3, 7.0});
    const auto n2 = Normalizer::fit(pts);
    for (std::size_t d = 0; d < 3; ++d) {
        double mean = 0, ss = 0;
        for (const auto &p : pts)
            mean += n2.apply(p)[d];
        mean /= 30;
        for (const auto &p : pts)
            ss += (n2.apply(p)[d] - mean) * (n2.apply(p)[d] - mean);
        CHECK(std::abs(mean) < 1e-9);
        if (d < 2)
            CHECK(std::sqrt(ss / 29) == doctest::Approx(1.0));
    }
}

TEST_CASE("cosine similarity") {
    const Vector a{1, 2, 2}, b{2, 1, 2};
    CHECK(cosine_sim(a, a) == doctest::Approx(1.0));
    CHECK(cosine_sim(Vector{1, 0}, Vector{0, 1}) == 0.0);
    CHECK(cosine_sim(a, b) == doctest::Approx(8.0 / 9.0));
    CHECK(cosine_sim(Vector{0, 0, 0}, a) == 0.0);
    CHECK_THROWS_AS(cosine_sim(a, Vector{1, 2}), UsageError);

    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto x = random_vector(rng, 6), y = random_vector(rng, 6);
        const double beta = 0.01 + rng.unit() * 100;
        Vector bx = x;
        for (auto &v : bx)
            v *= beta;
        const double s = cosine_sim(x, y);
        CHECK(std::abs(cosine_sim(bx, y) - s) <= 1e-12 * std::max(1.0, std::abs(s)));
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("top-m retrieval") {
    Kernel only;
    only.id = 7;
    only.signature = {1, 0};
    const std::vector<Kernel> one{only};
    const auto hits = retrieve_topm(Vector{0.3, 1}, one, 5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == 7);
    CHECK_THROWS_AS(retrieve_topm(Vector{1, 0}, one, 0), UsageError);
    CHECK_THROWS_AS(retrieve_topm(Vector{1, 0}, std::span<const Kernel>{}, 1), UsageError);

    Rng rng(12);
    std::vector<Kernel> lib;
    for (int i = 0; i < 10; ++i) {
        Kernel k;
        k.id = 100 - i;
        k.signature = random_vector(rng, 5);
        lib.push_back(k);
    }
    const auto exact = retrieve_topm(lib[4].signature, lib, 3);
    CHECK(exact[0].id == lib[4].id);
    CHECK(exact[0].similarity == doctest::Approx(1.0));

    for (int t = 0; t < 200; ++t) {
        const auto q = random_vector(rng, 5);
        for (const std::size_t m : {1u, 3u, 5u}) {
            const auto got = retrieve_topm(q, lib, m);
            const auto want = full_sort_topm(q, lib, m);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].id == want[i].id);
                CHECK(got[i].index == want[i].index);
            }
        }
    }
}
