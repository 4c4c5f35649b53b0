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
#include <map>
#include <set>

#include "kernsched/synthesis.hpp"

namespace kernsched {

namespace {

constexpr double grid_magnitudes[] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
constexpr int max_sweeps = 3;

std::vector<double> candidates(const SearchAxis &axis) {
    std::set<double> values;
    for (const double g : grid_magnitudes)
        for (const double v : {g, -g})
            if (v >= axis.lo && v <= axis.hi)
                values.insert(v == 0.0 ? 0.0 : v);
    return {values.begin(), values.end()};
}

double batch_objective(const std::vector<SearchAxis> &axes, const std::vector<double> &coeffs,
                       const GraphSet &batch, double mu) {
    double total = 0.0;
    for (std::size_t g = 0; g < batch.size(); ++g) {
        const auto &dag = batch.graphs[g];
        const auto &stats = batch.stats[g];
        std::vector<double> priority(dag.size(), 0.0);
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (coeffs[a] == 0.0)
                continue;
            for (NodeId v = 0; v < static_cast<NodeId>(dag.size()); ++v)
                priority[static_cast<std::size_t>(v)] += coeffs[a] * feature_value(axes[a].feature, dag, stats, v);
        }
        const Schedule s = list_schedule_priorities(dag, priority);
        total += -static_cast<double>(s.makespan) - (s.feasible ? 0.0 : mu);
    }
    return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

} // namespace

std::vector<SearchAxis> fallback_search_space(std::span<const Kernel> kernels) {
    std::set<TemplateFamily> families;
    for (const auto &k : kernels)
        families.insert(k.tmpl.family);
    if (families.empty())
        return {{Feature::crit, 1.0, 0.0, 4.0}, {Feature::fanout, 1.0, 0.0, 4.0}, {Feature::level, 1.0, -4.0, 4.0}};

    std::map<std::string_view, SearchAxis> merged;
    for (const TemplateFamily family : families) {
        // Use the first retrieved kernel's copy so stored defaults and ranges apply.
        const auto it = std::find_if(kernels.begin(), kernels.end(),
                                     [&](const Kernel &k) { return k.tmpl.family == family; });
        for (const auto &w : it->tmpl.weights) {
            const double a = w.sign * w.lo;
            const double b = w.sign * w.hi;
            auto [slot, fresh] = merged.try_emplace(feature_name(w.feature),
                                                    SearchAxis{w.feature, 0.0, std::min(a, b), std::max(a, b)});
            slot->second.start += w.sign * w.default_value;
            slot->second.lo = std::min(slot->second.lo, std::min(a, b));
            slot->second.hi = std::max(slot->second.hi, std::max(a, b));
        }
    }
    std::vector<SearchAxis> axes;
    for (auto &[name, axis] : merged) {
        axis.start = std::clamp(axis.start, axis.lo, axis.hi);
        axes.push_back(axis);
    }
    return axes;
}

PriorityExpr fallback_synthesize(std::span<const Kernel> kernels, const GraphSet &batch, const LoopConfig &config) {
    const auto axes = fallback_search_space(kernels);
    std::vector<double> coeffs;
    for (const auto &a : axes)
        coeffs.push_back(a.start);

    const auto all_zero = [](const std::vector<double> &c) {
        return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
    };
    if (all_zero(coeffs))
        coeffs.front() = axes.front().hi != 0.0 ? axes.front().hi : axes.front().lo;

    double best = batch_objective(axes, coeffs, batch, config.mu);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool improved = false;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const double keep = coeffs[a];
            double chosen = keep;
            for (const double value : candidates(axes[a])) {
                if (value == keep)
                    continue;
                coeffs[a] = value;
                if (all_zero(coeffs))
                    continue;
                const double obj = batch_objective(axes, coeffs, batch, config.mu);
                if (obj > best) {
                    best = obj;
                    chosen = value;
                }
            }
            coeffs[a] = chosen;
            improved = improved || chosen != keep;
        }
        if (!improved)
            break;
    }

    std::vector<Term> terms;
    for (std::size_t a = 0; a < axes.size(); ++a)
        terms.push_back({coeffs[a], axes[a].feature});
    return PriorityExpr::from_terms(std::move(terms));
}

} // namespace kernsched
