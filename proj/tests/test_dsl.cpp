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
#include <limits>

#include "support.hpp"

using namespace kernsched;
using namespace kernsched::testing;

TEST_CASE("parse examples") {
    const auto eq = parse_expr("1*crit + 1*fanout - 1*level");
    CHECK(eq.terms().size() == 3);
    CHECK(eq.coefficient(Feature::crit) == 1.0);
    CHECK(eq.coefficient(Feature::fanout) == 1.0);
    CHECK(eq.coefficient(Feature::level) == -1.0);

    CHECK(parse_expr("level") == baseline_priority());
    CHECK_THROWS_AS(parse_expr("2*bogus"), ParseError);
}

TEST_CASE("grammar details") {
    CHECK(print_expr(parse_expr("  2 * crit+3")) == "3*const + 2*crit");
    CHECK(print_expr(parse_expr("-level")) == "-1*level");
    CHECK(print_expr(parse_expr("crit + crit")) == "2*crit");
    CHECK(print_expr(parse_expr("1.5e1*slack")) == "15*slack");
    CHECK(print_expr(parse_expr("0.1*fanin - 0.25*reconv")) == "0.1*fanin - 0.25*reconv");
    CHECK(print_expr(parse_expr("pressure+duration")) == "1*duration + 1*pressure");
    CHECK(print_expr(parse_expr("const")) == "1*const");

    for (const char *bad : {"", "+", "crit +", "2**crit", "crit crit", "1e999*crit", "crit - crit", "0*level",
                            "(crit)", "crit*2"})
        CHECK_THROWS_AS(parse_expr(bad), ParseError);

    try {
        parse_expr("crit + 2*bogus");
        FAIL("accepted");
    } catch (const ParseError &e) {
        CHECK(e.offset() == 9);
    }
}

TEST_CASE("canonical printing") {
    CHECK(print_expr(parse_expr("fanout+crit")) == "1*crit + 1*fanout");
    CHECK(print_expr(parse_expr("0*level + crit")) == "1*crit");
    const std::string eq = "1*crit + 1*fanout - 1*level";
    CHECK(print_expr(parse_expr(eq)) == eq);
}

TEST_CASE("evaluation") {
    const Dag d = diamond(1);
    const auto st = analyze(d);
    CHECK(eval_expr(parse_expr("1*crit + 1*fanout - 1*level"), d, st, 1) == 2.0);
    CHECK(eval_expr(baseline_priority(), d, st, 3) == 2.0);
    for (NodeId v = 0; v < 4; ++v)
        CHECK(eval_expr(parse_expr("3*const"), d, st, v) == 3.0);

    const Dag mixed = Dag::create({{0, "add", 2}, {1, "mul", 1}}, {{0, 1}}, {{"add", 1}, {"mul", 2}});
    const auto ms = analyze(mixed);
    CHECK(eval_expr(parse_expr("pressure"), mixed, ms, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(eval_expr(parse_expr("pressure"), mixed, ms, 1) == doctest::Approx(1.0 / 6.0));
    CHECK(eval_expr(parse_expr("duration + fanin"), mixed, ms, 1) == 2.0);
}

TEST_CASE("round trip on random expressions") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const auto e = random_expr(rng);
        const auto text = print_expr(e);
        REQUIRE(parse_expr(text) == e);
        CHECK(print_expr(parse_expr(text)) == text);
    }
}

TEST_CASE("evaluation is linear under term-wise merge") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Dag dag = random_dag(rng, rng.between(1, 10), 0.3);
        const auto st = analyze(dag);
        const auto a = random_expr(rng);
        const auto b = random_expr(rng);
        bool cancelled = false;
        PriorityExpr ab;
        try {
            ab = merge(a, b);
        } catch (const ParseError &) {
            cancelled = true;
        }
        for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v) {
            const double sum = eval_expr(a, dag, st, v) + eval_expr(b, dag, st, v);
            if (cancelled)
                CHECK(sum == doctest::Approx(0.0));
            else
                CHECK(eval_expr(ab, dag, st, v) == doctest::Approx(sum));
        }
    }
}

TEST_CASE("positive scaling keeps the schedule") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        const Dag dag = random_dag(rng, rng.between(1, 12), 0.3);
        const auto st = analyze(dag);
        const auto e = random_expr(rng);
        const double factor = 0.25 * rng.between(1, 40);
        CHECK(list_schedule(dag, st, e).start == list_schedule(dag, st, e.scaled(factor)).start);
    }
    CHECK_THROWS(baseline_priority().scaled(0.0));
}

TEST_CASE("named policies") {
    CHECK(print_expr(*named_policy("level")) == "1*level");
    CHECK(print_expr(*named_policy("topo_id")) == "1*const");
    CHECK(print_expr(*named_policy("fanout_aware")) == "1*fanout");
    CHECK(print_expr(*named_policy("zero_slack")) == "-1*slack");
    CHECK_FALSE(named_policy("nope").has_value());
}

TEST_CASE("heuristic files") {
    const auto exprs = parse_heuristic_file_text("# policies\n\n1*level\n  crit + fanout  # inline\n");
    REQUIRE(exprs.size() == 2);
    CHECK(exprs[0] == baseline_priority());
    CHECK(print_expr(exprs[1]) == "1*crit + 1*fanout");
    CHECK_THROWS_AS(parse_heuristic_file_text("crit\nbogus\n"), ParseError);
}

TEST_CASE("feature names") {
    for (const Feature f : all_features)
        CHECK(feature_from_name(feature_name(f)) == f);
    CHECK_FALSE(feature_from_name("bogus").has_value());
}
