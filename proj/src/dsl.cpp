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

#include "kernsched/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace kernsched {

std::string_view feature_name(Feature f) {
    switch (f) {
    case Feature::constant: return "const";
    case Feature::crit: return "crit";
    case Feature::duration: return "duration";
    case Feature::fanin: return "fanin";
    case Feature::fanout: return "fanout";
    case Feature::level: return "level";
    case Feature::pressure: return "pressure";
    case Feature::reconv: return "reconv";
    case Feature::slack: return "slack";
    }
    return "?";
}

std::optional<Feature> feature_from_name(std::string_view name) {
    for (const Feature f : all_features)
        if (feature_name(f) == name)
            return f;
    return std::nullopt;
}

double feature_value(Feature f, const Dag &dag, const GraphStats &stats, NodeId v) {
    const auto i = static_cast<std::size_t>(v);
    switch (f) {
    case Feature::constant: return 1.0;
    case Feature::crit: return stats.crit[i];
    case Feature::duration: return dag.node(v).duration;
    case Feature::fanin: return stats.fanin[i];
    case Feature::fanout: return stats.fanout[i];
    case Feature::level: return stats.level[i];
    case Feature::pressure: return stats.pressure_of(dag.node(v).op_type);
    case Feature::reconv: return stats.reconv[i];
    case Feature::slack: return stats.slack[i];
    }
    return 0.0;
}

PriorityExpr PriorityExpr::from_terms(std::vector<Term> terms) {
    std::map<std::string_view, Term> by_name;
    for (const auto &t : terms) {
        if (!std::isfinite(t.coefficient))
            throw ParseError(fmt::format("coefficient of '{}' is not finite", feature_name(t.feature)), 0);
        auto [it, inserted] = by_name.try_emplace(feature_name(t.feature), t);
        if (!inserted)
            it->second.coefficient += t.coefficient;
    }
    PriorityExpr e;
    for (const auto &[name, t] : by_name) {
        if (!std::isfinite(t.coefficient))
            throw ParseError(fmt::format("coefficient of '{}' overflows", name), 0);
        if (t.coefficient != 0.0)
            e.terms_.push_back(t);
    }
    if (e.terms_.empty())
        throw ParseError("expression has no nonzero term", 0);
    return e;
}

double PriorityExpr::coefficient(Feature f) const {
    for (const auto &t : terms_)
        if (t.feature == f)
            return t.coefficient;
    return 0.0;
}

PriorityExpr PriorityExpr::scaled(double factor) const {
    auto terms = terms_;
    for (auto &t : terms)
        t.coefficient *= factor;
    return from_terms(std::move(terms));
}

namespace {

class ExprParser {
  public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    PriorityExpr parse() {
        std::vector<Term> terms;
        skip_ws();
        double sign = 1.0;
        if (peek('+') || peek('-')) {
            sign = text_[pos_] == '-' ? -1.0 : 1.0;
            ++pos_;
        }
        terms.push_back(term(sign));
        for (skip_ws(); pos_ < text_.size(); skip_ws()) {
            if (!peek('+') && !peek('-'))
                fail("expected '+' or '-'");
            sign = text_[pos_] == '-' ? -1.0 : 1.0;
            ++pos_;
            terms.push_back(term(sign));
        }
        try {
            return PriorityExpr::from_terms(std::move(terms));
        } catch (const ParseError &e) {
            throw ParseError(e.what(), text_.size());
        }
    }

  private:
    Term term(double sign) {
        skip_ws();
        if (pos_ >= text_.size())
            fail("expected a term");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const double value = number();
            skip_ws();
            if (!peek('*'))
                return {sign * value, Feature::constant};
            ++pos_;
            skip_ws();
            return {sign * value, feature()};
        }
        return {sign, feature()};
    }

    double number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        };
        digits();
        if (peek('.')) {
            ++pos_;
            digits();
        }
        if (peek('e') || peek('E')) {
            ++pos_;
            if (peek('+') || peek('-'))
                ++pos_;
            const std::size_t exp_start = pos_;
            digits();
            if (pos_ == exp_start)
                fail("malformed exponent");
        }
        double value = 0.0;
        const char *first = text_.data() + start;
        const char *last = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec == std::errc::result_out_of_range)
            throw ParseError(fmt::format("non-finite literal '{}'", std::string_view(first, last)), start);
        if (ec != std::errc() || ptr != last)
            throw ParseError(fmt::format("malformed number '{}'", std::string_view(first, last)), start);
        if (!std::isfinite(value))
            throw ParseError("non-finite literal", start);
        return value;
    }

    Feature feature() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start)
            fail("expected a feature name");
        const auto name = text_.substr(start, pos_ - start);
        const auto f = feature_from_name(name);
        if (!f)
            throw ParseError(fmt::format("unknown feature '{}'", name), start);
        return *f;
    }

    bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    [[noreturn]] void fail(const char *what) const {
        throw ParseError(fmt::format("{} at offset {} in '{}'", what, pos_, text_), pos_);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string format_number(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, ptr};
}

} // namespace

PriorityExpr parse_expr(std::string_view text) { return ExprParser(text).parse(); }

std::string print_expr(const PriorityExpr &expr) {
    std::string out;
    bool first = true;
    for (const auto &t : expr.terms()) {
        const bool negative = t.coefficient < 0.0;
        if (first)
            out += negative ? "-" : "";
        else
            out += negative ? " - " : " + ";
        out += format_number(std::fabs(t.coefficient));
        out += '*';
        out += feature_name(t.feature);
        first = false;
    }
    return out;
}

PriorityExpr merge(const PriorityExpr &a, const PriorityExpr &b) {
    auto terms = a.terms();
    terms.insert(terms.end(), b.terms().begin(), b.terms().end());
    return PriorityExpr::from_terms(std::move(terms));
}

double eval_expr(const PriorityExpr &expr, const Dag &dag, const GraphStats &stats, NodeId v) {
    double sum = 0.0;
    for (const auto &t : expr.terms())
        sum += t.coefficient * feature_value(t.feature, dag, stats, v);
    return sum;
}

std::vector<double> eval_all(const PriorityExpr &expr, const Dag &dag, const GraphStats &stats) {
    std::vector<double> out(dag.size());
    for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v)
        out[static_cast<std::size_t>(v)] = eval_expr(expr, dag, stats, v);
    return out;
}

PriorityExpr baseline_priority() { return PriorityExpr::from_terms({{1.0, Feature::level}}); }

std::optional<PriorityExpr> named_policy(std::string_view name) {
    if (name == "level")
        return baseline_priority();
    if (name == "topo_id")
        return PriorityExpr::from_terms({{1.0, Feature::constant}});
    if (name == "fanout_aware")
        return PriorityExpr::from_terms({{1.0, Feature::fanout}});
    if (name == "zero_slack")
        return PriorityExpr::from_terms({{-1.0, Feature::slack}});
    return std::nullopt;
}

std::vector<PriorityExpr> parse_heuristic_file_text(std::string_view text) {
    std::vector<PriorityExpr> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        try {
            out.push_back(parse_expr(line));
        } catch (const ParseError &e) {
            throw ParseError(fmt::format("line {}: {}", line_no, e.what()), e.offset());
        }
    }
    return out;
}

std::vector<PriorityExpr> load_heuristic_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(fmt::format("cannot read heuristic file '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_heuristic_file_text(buf.str());
}

} // namespace kernsched
