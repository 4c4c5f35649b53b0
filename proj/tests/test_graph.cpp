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

#include <nlohmann/json.hpp>

#include "support.hpp"

using namespace kernsched;
using namespace kernsched::testing;

namespace {

const char *chain_doc = R"({"nodes": [{"id": 0, "type": "add", "duration": 1},
                                      {"id": 1, "type": "add", "duration": 1},
                                      {"id": 2, "type": "add", "duration": 1}],
                            "edges": [[0, 1], [1, 2]],
                            "capacities": {"add": 1}})";

GraphErrorKind load_error(const std::string &doc) {
    try {
        load_dag(doc);
    } catch (const GraphError &e) {
        return e.graph_error();
    }
    FAIL("document was accepted");
    return GraphErrorKind::malformed;
}

} // namespace

TEST_CASE("loading a three node chain") {
    const Dag dag = load_dag(chain_doc);
    CHECK(dag.size() == 3);
    CHECK(dag.edges().size() == 2);
    CHECK(dag.topo_order() == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("load rejects malformed graphs") {
    auto doc = nlohmann::json::parse(chain_doc);

    auto cyclic = doc;
    cyclic["edges"].push_back({1, 0});
    CHECK(load_error(cyclic.dump()) == GraphErrorKind::cycle);

    auto dangling = doc;
    dangling["edges"].push_back({0, 99});
    CHECK(load_error(dangling.dump()) == GraphErrorKind::dangling_edge);

    auto no_cap = doc;
    no_cap["capacities"] = nlohmann::json::object();
    CHECK(load_error(no_cap.dump()) == GraphErrorKind::missing_capacity);

    auto dup = doc;
    dup["nodes"][2]["id"] = 1;
    CHECK(load_error(dup.dump()) == GraphErrorKind::duplicate_id);

    CHECK(load_error("{\"nodes\": 3}") == GraphErrorKind::malformed);
    CHECK(load_error("not json") == GraphErrorKind::malformed);

    auto zero_duration = doc;
    zero_duration["nodes"][0]["duration"] = 0;
    CHECK_THROWS_AS(load_dag(zero_duration.dump()), FormatError);
}

TEST_CASE("canonical dump is a fixpoint and sorts edges") {
    const Dag dag = make_dag({1, 2, 1}, {{1, 2}, {0, 2}, {0, 1}});
    const std::string text = dump_dag(dag);
    const Dag again = load_dag(text);
    CHECK(again == dag);
    CHECK(dump_dag(again) == text);
    CHECK(again.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("levels") {
    CHECK(compute_levels(chain(3)) == std::vector<int>{0, 1, 2});
    CHECK(compute_levels(diamond()) == std::vector<int>{0, 1, 1, 2});
    CHECK(compute_levels(make_dag({3, 1}, {{0, 1}})) == std::vector<int>{0, 3});
}

TEST_CASE("remaining critical path") {
    CHECK(compute_crit(diamond()) == std::vector<int>{3, 2, 2, 1});
    // a->b->d, a->c with c a leaf; ids a=0 b=1 c=2 d=3
    const Dag side = make_dag({1, 1, 1, 1}, {{0, 1}, {1, 3}, {0, 2}});
    const auto crit = compute_crit(side);
    CHECK(crit[2] == 1);
    CHECK(crit[0] == 3);
    CHECK(compute_crit(make_dag({5}, {})) == std::vector<int>{5});
}

TEST_CASE("slack") {
    const auto st = analyze(diamond());
    CHECK(st.slack == std::vector<int>{0, 0, 0, 0});
    const auto side = analyze(make_dag({1, 1, 1, 1}, {{0, 1}, {1, 3}, {0, 2}}));
    CHECK(side.slack[2] == 1);
    CHECK(analyze(make_dag({4}, {})).slack == std::vector<int>{0});
}

TEST_CASE("reconvergence marker") {
    CHECK(compute_reconv(diamond())[0] == 1);
    // a->{b,c} with b->d, c->e disjoint
    CHECK(compute_reconv(make_dag({1, 1, 1, 1, 1}, {{0, 1}, {0, 2}, {1, 3}, {2, 4}}))[0] == 0);
    // a->{b,c,e}, all reach d
    const Dag three = make_dag({1, 1, 1, 1, 1}, {{0, 1}, {0, 2}, {0, 4}, {1, 3}, {2, 3}, {4, 3}});
    CHECK(compute_reconv(three)[0] == 3);
    CHECK(brute_reconv(three)[0] == 3);
    // a->b, a->c, b->c: c is reachable from both children
    CHECK(compute_reconv(make_dag({1, 1, 1}, {{0, 1}, {0, 2}, {1, 2}}))[0] == 1);
}

TEST_CASE("resource pressure") {
    const Dag four = independent(4, 2, "m");
    CHECK(compute_pressure(four, 1).at("m") == doctest::Approx(2.0));
    const Dag c3 = chain(3);
    CHECK(compute_pressure(c3, 3).at("add") == doctest::Approx(1.0));

    const Dag mixed = Dag::create({{0, "add", 1}}, {}, {{"add", 1}, {"mul", 3}});
    const auto st = analyze(mixed);
    CHECK(st.pressure_of("mul") == 0.0);
}

TEST_CASE("structural analyses agree with brute force on random graphs") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const Dag dag = random_dag(rng, rng.between(1, 10), 0.3);
        const auto st = analyze(dag);
        REQUIRE(st.crit == brute_crit(dag));
        REQUIRE(st.reconv == brute_reconv(dag));
        bool tight = false;
        for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v) {
            const auto i = static_cast<std::size_t>(v);
            CHECK(st.level[i] + st.crit[i] <= st.critical_path);
            CHECK(st.slack[i] >= 0);
            CHECK(st.crit[i] >= dag.node(v).duration);
            CHECK(st.reconv[i] <= st.fanout[i] * (st.fanout[i] - 1) / 2);
            tight = tight || (st.level[i] == 0 && st.slack[i] == 0);
        }
        CHECK(tight);
        CHECK(analyze(dag).crit == st.crit);
    }
}

TEST_CASE("induced subgraph renumbers by ascending id") {
    const Dag dag = diamond();
    const std::vector<NodeId> members{3, 1, 0};
    const Dag sub = induced_subgraph(dag, members);
    CHECK(sub.size() == 3);
    CHECK(sub.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
    CHECK(sub.capacities() == dag.capacities());
}
