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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kernsched/analysis.hpp"
#include "kernsched/error.hpp"

namespace kernsched {

/// Closed feature vocabulary, declared in canonical (alphabetical) order.
enum class Feature { constant, crit, duration, fanin, fanout, level, pressure, reconv, slack };

inline constexpr std::array<Feature, 9> all_features = {
    Feature::constant, Feature::crit,     Feature::duration, Feature::fanin, Feature::fanout,
    Feature::level,    Feature::pressure, Feature::reconv,   Feature::slack,
};

std::string_view feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);

/// Value of feature `f` for node v. `pressure` resolves to the node's own type.
double feature_value(Feature f, const Dag &dag, const GraphStats &stats, NodeId v);

class ParseError : public FormatError {
  public:
    ParseError(const std::string &what, std::size_t offset) : FormatError(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

struct Term {
    double coefficient = 0.0;
    Feature feature = Feature::constant;

    bool operator==(const Term &) const = default;
};

/**
 * Linear priority expression over node features.
 *
 * Always held in canonical form: one term per feature, sorted by feature
 * name, no zero coefficients, at least one term. Two expressions are equal
 * iff their canonical texts are equal.
 */
class PriorityExpr {
  public:
    /// Canonicalizes; throws ParseError if no nonzero term remains or a
    /// coefficient is non-finite.
    static PriorityExpr from_terms(std::vector<Term> terms);

    const std::vector<Term> &terms() const { return terms_; }
    double coefficient(Feature f) const;
    bool uses(Feature f) const { return coefficient(f) != 0.0; }

    PriorityExpr scaled(double factor) const;

    bool operator==(const PriorityExpr &) const = default;

  private:
    std::vector<Term> terms_;
};

PriorityExpr parse_expr(std::string_view text);
std::string print_expr(const PriorityExpr &expr);

/// Term-wise merge: coefficients of shared features add.
PriorityExpr merge(const PriorityExpr &a, const PriorityExpr &b);

double eval_expr(const PriorityExpr &expr, const Dag &dag, const GraphStats &stats, NodeId v);

/// Static priority of every node, in id order.
std::vector<double> eval_all(const PriorityExpr &expr, const Dag &dag, const GraphStats &stats);

/// `1*level` with ascending-id tie-breaking applied by the scheduler.
PriorityExpr baseline_priority();

/**
 * Named reference policies: "level" (baseline), "topo_id" (all ties, so the
 * scheduler falls back to id order), "fanout_aware", "zero_slack".
 */
std::optional<PriorityExpr> named_policy(std::string_view name);

/// Heuristic file: one expression per line, blank lines and `#` comments skipped.
std::vector<PriorityExpr> parse_heuristic_file_text(std::string_view text);
std::vector<PriorityExpr> load_heuristic_file(const std::filesystem::path &path);

} // namespace kernsched
