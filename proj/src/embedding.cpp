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

#include "kernsched/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace kernsched {

TypeVocabulary::TypeVocabulary(std::vector<std::string> types) : types_(std::move(types)) {
    std::sort(types_.begin(), types_.end());
    types_.erase(std::unique(types_.begin(), types_.end()), types_.end());
}

TypeVocabulary TypeVocabulary::from_graphs(std::span<const Dag> graphs) {
    std::set<std::string> all;
    for (const auto &g : graphs)
        for (const auto &n : g.nodes())
            all.insert(n.op_type);
    return TypeVocabulary({all.begin(), all.end()});
}

std::size_t TypeVocabulary::index_of(const std::string &op_type) const {
    const auto it = std::lower_bound(types_.begin(), types_.end(), op_type);
    if (it == types_.end() || *it != op_type)
        throw UsageError(fmt::format("op type '{}' is not in the embedding vocabulary", op_type));
    return static_cast<std::size_t>(it - types_.begin());
}

std::size_t embedding_dim(const TypeVocabulary &vocab) {
    return crit_summary_dims + 2 * histogram_bins + 2 * vocab.size();
}

std::size_t fanout_bin(int fanout) {
    if (fanout <= 3)
        return static_cast<std::size_t>(std::max(fanout, 0));
    if (fanout <= 5)
        return 4;
    if (fanout <= 8)
        return 5;
    if (fanout <= 16)
        return 6;
    return 7;
}

Vector embed(const Dag &dag, const GraphStats &stats, const TypeVocabulary &vocab) {
    Vector out(embedding_dim(vocab), 0.0);
    const std::size_t n = dag.size();
    std::vector<std::size_t> type_index(n);
    for (std::size_t v = 0; v < n; ++v)
        type_index[v] = vocab.index_of(dag.nodes()[v].op_type);
    if (n == 0)
        return out;

    const double cp = stats.critical_path;
    const double inv_n = 1.0 / static_cast<double>(n);

    double mean = 0.0;
    for (const int c : stats.crit)
        mean += c / cp;
    mean *= inv_n;
    double var = 0.0;
    for (const int c : stats.crit)
        var += (c / cp - mean) * (c / cp - mean);
    var *= inv_n;
    out[0] = cp * inv_n;
    out[1] = mean;
    out[2] = std::sqrt(var);

    const std::size_t fan_base = crit_summary_dims;
    const std::size_t level_base = fan_base + histogram_bins;
    const std::size_t type_base = level_base + histogram_bins;
    const std::size_t pressure_base = type_base + vocab.size();
    const long cp_cycles = stats.critical_path;
    for (std::size_t v = 0; v < n; ++v) {
        out[fan_base + fanout_bin(stats.fanout[v])] += inv_n;
        const auto bin = std::min<long>(static_cast<long>(histogram_bins) - 1,
                                        static_cast<long>(histogram_bins) * stats.level[v] / cp_cycles);
        out[level_base + static_cast<std::size_t>(bin)] += inv_n;
        out[type_base + type_index[v]] += inv_n;
    }
    for (std::size_t t = 0; t < vocab.size(); ++t)
        out[pressure_base + t] = stats.pressure_of(vocab.types()[t]);
    return out;
}

Vector embed(const Dag &dag, const TypeVocabulary &vocab) { return embed(dag, analyze(dag), vocab); }

Normalizer Normalizer::fit(std::span<const Vector> training) {
    if (training.size() < 2)
        throw UsageError(fmt::format("normalizer needs at least 2 training embeddings, got {}", training.size()));
    const std::size_t dim = training.front().size();
    for (const auto &x : training)
        if (x.size() != dim)
            throw UsageError("training embeddings have inconsistent dimensions");

    Normalizer nz;
    nz.mean_.assign(dim, 0.0);
    nz.std_.assign(dim, 0.0);
    const double count = static_cast<double>(training.size());
    for (const auto &x : training)
        for (std::size_t i = 0; i < dim; ++i)
            nz.mean_[i] += x[i];
    for (auto &m : nz.mean_)
        m /= count;
    for (const auto &x : training)
        for (std::size_t i = 0; i < dim; ++i)
            nz.std_[i] += (x[i] - nz.mean_[i]) * (x[i] - nz.mean_[i]);
    for (auto &s : nz.std_)
        s = std::sqrt(s / (count - 1.0));
    return nz;
}

Vector Normalizer::apply(const Vector &x) const {
    if (x.size() != mean_.size())
        throw UsageError(fmt::format("embedding has {} dims, normalizer expects {}", x.size(), mean_.size()));
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std_[i] > 0.0 ? (x[i] - mean_[i]) / std_[i] : 0.0;
    return out;
}

nlohmann::json Normalizer::to_json() const {
    return {{"mean", mean_}, {"std", std_}, {"layout", embedding_layout}};
}

Normalizer Normalizer::from_json(const nlohmann::json &doc) {
    if (!doc.is_object() || !doc.contains("mean") || !doc.contains("std") || !doc.contains("layout"))
        throw FormatError("normalizer document needs \"mean\", \"std\" and \"layout\"");
    if (doc["layout"] != embedding_layout)
        throw FormatError(fmt::format("normalizer layout '{}' is not '{}'", doc["layout"].dump(), embedding_layout));
    Normalizer nz;
    try {
        nz.mean_ = doc["mean"].get<Vector>();
        nz.std_ = doc["std"].get<Vector>();
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(fmt::format("normalizer vectors are malformed: {}", e.what()));
    }
    if (nz.mean_.size() != nz.std_.size())
        throw FormatError("normalizer mean and std lengths differ");
    for (const double s : nz.std_)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw FormatError("normalizer std entries must be finite and non-negative");
    return nz;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw UsageError(fmt::format("cosine_sim length mismatch: {} vs {}", a.size(), b.size()));
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

} // namespace kernsched
