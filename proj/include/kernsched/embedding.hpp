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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernsched/analysis.hpp"

namespace kernsched {

using Vector = std::vector<double>;

/// Version tag written next to every stored embedding-space artifact.
inline constexpr std::string_view embedding_layout = "v1";

inline constexpr std::size_t crit_summary_dims = 3;
inline constexpr std::size_t histogram_bins = 8;

/// Op-type vocabulary fixing the type-dependent embedding dimensions.
class TypeVocabulary {
  public:
    TypeVocabulary() = default;
    explicit TypeVocabulary(std::vector<std::string> types);

    /// Sorted union of the op types used by `graphs`.
    static TypeVocabulary from_graphs(std::span<const Dag> graphs);

    const std::vector<std::string> &types() const { return types_; }
    std::size_t size() const { return types_.size(); }
    std::size_t index_of(const std::string &op_type) const;

    bool operator==(const TypeVocabulary &) const = default;

  private:
    std::vector<std::string> types_;
};

/// 3 + 8 + 8 + |T| + |T|.
std::size_t embedding_dim(const TypeVocabulary &vocab);

/// Fanout histogram bin of an out-degree: 0,1,2,3,4-5,6-8,9-16,17+.
std::size_t fanout_bin(int fanout);

/**
 * Whole-graph structural embedding, layout v1:
 *
 *   [ cp/|V|, mean(crit/cp), std(crit/cp)      crit-path summary (population std)
 *   | fanout histogram (8 bins, node fractions)
 *   | level histogram  (level/cp in 8 equal bins, node fractions)
 *   | op-type histogram (vocabulary order, node fractions)
 *   | pressure per type (vocabulary order) ]
 *
 * Throws UsageError when a node type is outside the vocabulary.
 */
Vector embed(const Dag &dag, const GraphStats &stats, const TypeVocabulary &vocab);
Vector embed(const Dag &dag, const TypeVocabulary &vocab);

/// Per-dimension z-score fitted on training embeddings (sample std).
class Normalizer {
  public:
    static Normalizer fit(std::span<const Vector> training);

    Vector apply(const Vector &x) const;

    const Vector &mean() const { return mean_; }
    const Vector &stddev() const { return std_; }
    std::size_t dim() const { return mean_.size(); }

    nlohmann::json to_json() const;
    static Normalizer from_json(const nlohmann::json &doc);

  private:
    Vector mean_;
    Vector std_;
};

/// Cosine similarity; 0 when either vector is all zeros.
double cosine_sim(std::span<const double> a, std::span<const double> b);

} // namespace kernsched
