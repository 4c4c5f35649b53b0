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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernsched/dsl.hpp"
#include "kernsched/embedding.hpp"

namespace kernsched {

/// Structural motif kinds. `whole_graph` only appears in the no-motif ablation.
enum class MotifCategory { khop, high_centrality, reconvergent, chain, whole_graph };

std::string_view category_name(MotifCategory c);
std::optional<MotifCategory> category_from_name(std::string_view name);

enum class TemplateFamily { reconvergent_A, deep_chain_B, fanout_aware, resource_aware };

std::string_view family_name(TemplateFamily f);
std::optional<TemplateFamily> family_from_name(std::string_view name);

/// Family used for kernels mined from motifs of category `c`.
TemplateFamily family_for_category(MotifCategory c);

/// One tunable weight: contributes sign * value * feature.
struct TemplateWeight {
    std::string name;
    Feature feature;
    double sign = 1.0;
    double default_value = 1.0;
    double lo = 0.0;
    double hi = 4.0;

    bool operator==(const TemplateWeight &) const = default;
};

/**
 * Heuristic template of a kernel.
 *
 *   reconvergent_A  alpha1*crit + alpha2*reconv + alpha3*fanout
 *   deep_chain_B    beta1*crit - beta2*slack
 *   fanout_aware    w1*fanout + w2*crit
 *   resource_aware  w1*crit + w2*pressure
 */
struct TemplateSpec {
    TemplateFamily family = TemplateFamily::fanout_aware;
    std::vector<TemplateWeight> weights;

    static TemplateSpec defaults_for(TemplateFamily family);

    std::map<std::string, double> default_weights() const;

    bool operator==(const TemplateSpec &) const = default;
};

/// Throws UsageError for out-of-range, unknown or all-zero weights. Missing
/// weights take their defaults.
PriorityExpr instantiate_template(const TemplateSpec &spec, const std::map<std::string, double> &weights);
PriorityExpr instantiate_defaults(const TemplateSpec &spec);

struct Kernel {
    int id = 0;
    MotifCategory category = MotifCategory::khop;
    Vector signature; ///< normalized embedding-space centroid
    TemplateSpec tmpl;
    int support = 1;

    bool operator==(const Kernel &) const = default;
};

/// A kernel library plus the embedding space its signatures live in.
struct KernelLibrary {
    TypeVocabulary vocab;
    Normalizer normalizer;
    std::vector<Kernel> kernels;

    /// Normalized embedding of `dag` in this library's space.
    Vector query(const Dag &dag, const GraphStats &stats) const;

    nlohmann::json to_json() const;
    static KernelLibrary from_json(const nlohmann::json &doc);
    std::string dump() const;
    void save(const std::filesystem::path &path) const;
    static KernelLibrary load(const std::filesystem::path &path);
};

} // namespace kernsched
