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

#include "kernsched/kernel.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace kernsched {

using json = nlohmann::json;

std::string_view category_name(MotifCategory c) {
    switch (c) {
    case MotifCategory::khop: return "khop";
    case MotifCategory::high_centrality: return "high_centrality";
    case MotifCategory::reconvergent: return "reconvergent";
    case MotifCategory::chain: return "chain";
    case MotifCategory::whole_graph: return "whole_graph";
    }
    return "?";
}

std::optional<MotifCategory> category_from_name(std::string_view name) {
    for (const auto c : {MotifCategory::khop, MotifCategory::high_centrality, MotifCategory::reconvergent,
                         MotifCategory::chain, MotifCategory::whole_graph})
        if (category_name(c) == name)
            return c;
    return std::nullopt;
}

std::string_view family_name(TemplateFamily f) {
    switch (f) {
    case TemplateFamily::reconvergent_A: return "reconvergent_A";
    case TemplateFamily::deep_chain_B: return "deep_chain_B";
    case TemplateFamily::fanout_aware: return "fanout_aware";
    case TemplateFamily::resource_aware: return "resource_aware";
    }
    return "?";
}

std::optional<TemplateFamily> family_from_name(std::string_view name) {
    for (const auto f : {TemplateFamily::reconvergent_A, TemplateFamily::deep_chain_B, TemplateFamily::fanout_aware,
                         TemplateFamily::resource_aware})
        if (family_name(f) == name)
            return f;
    return std::nullopt;
}

TemplateFamily family_for_category(MotifCategory c) {
    switch (c) {
    case MotifCategory::reconvergent: return TemplateFamily::reconvergent_A;
    case MotifCategory::chain: return TemplateFamily::deep_chain_B;
    case MotifCategory::high_centrality: return TemplateFamily::fanout_aware;
    case MotifCategory::khop: return TemplateFamily::resource_aware;
    case MotifCategory::whole_graph: return TemplateFamily::fanout_aware;
    }
    return TemplateFamily::fanout_aware;
}

TemplateSpec TemplateSpec::defaults_for(TemplateFamily family) {
    TemplateSpec spec;
    spec.family = family;
    switch (family) {
    case TemplateFamily::reconvergent_A:
        spec.weights = {{"alpha1", Feature::crit}, {"alpha2", Feature::reconv}, {"alpha3", Feature::fanout}};
        break;
    case TemplateFamily::deep_chain_B:
        spec.weights = {{"beta1", Feature::crit}, {"beta2", Feature::slack, -1.0}};
        break;
    case TemplateFamily::fanout_aware:
        spec.weights = {{"w1", Feature::fanout}, {"w2", Feature::crit}};
        break;
    case TemplateFamily::resource_aware:
        spec.weights = {{"w1", Feature::crit}, {"w2", Feature::pressure}};
        break;
    }
    return spec;
}

std::map<std::string, double> TemplateSpec::default_weights() const {
    std::map<std::string, double> out;
    for (const auto &w : weights)
        out[w.name] = w.default_value;
    return out;
}

PriorityExpr instantiate_template(const TemplateSpec &spec, const std::map<std::string, double> &weights) {
    for (const auto &[name, value] : weights) {
        const bool known = std::any_of(spec.weights.begin(), spec.weights.end(),
                                       [&](const TemplateWeight &w) { return w.name == name; });
        if (!known)
            throw UsageError(fmt::format("template {} has no weight '{}'", family_name(spec.family), name));
    }
    std::vector<Term> terms;
    for (const auto &w : spec.weights) {
        const auto it = weights.find(w.name);
        const double value = it == weights.end() ? w.default_value : it->second;
        if (!(value >= w.lo && value <= w.hi))
            throw UsageError(fmt::format("weight {}={} outside [{}, {}]", w.name, value, w.lo, w.hi));
        terms.push_back({w.sign * value, w.feature});
    }
    try {
        return PriorityExpr::from_terms(std::move(terms));
    } catch (const ParseError &) {
        throw UsageError(fmt::format("template {} instantiated with all-zero weights", family_name(spec.family)));
    }
}

PriorityExpr instantiate_defaults(const TemplateSpec &spec) { return instantiate_template(spec, {}); }

Vector KernelLibrary::query(const Dag &dag, const GraphStats &stats) const {
    return normalizer.apply(embed(dag, stats, vocab));
}

namespace {

json template_to_json(const TemplateSpec &t) {
    json defaults = json::object();
    json ranges = json::object();
    for (const auto &w : t.weights) {
        defaults[w.name] = w.default_value;
        ranges[w.name] = {w.lo, w.hi};
    }
    return {{"family", family_name(t.family)}, {"defaults", defaults}, {"ranges", ranges}};
}

TemplateSpec template_from_json(const json &doc) {
    if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string())
        throw FormatError("template needs a string \"family\"");
    const auto family = family_from_name(doc["family"].get<std::string>());
    if (!family)
        throw FormatError(fmt::format("unknown template family '{}'", doc["family"].get<std::string>()));
    TemplateSpec t = TemplateSpec::defaults_for(*family);
    for (auto &w : t.weights) {
        if (doc.contains("defaults") && doc["defaults"].contains(w.name))
            w.default_value = doc["defaults"][w.name].get<double>();
        if (doc.contains("ranges") && doc["ranges"].contains(w.name)) {
            const auto &r = doc["ranges"][w.name];
            if (!r.is_array() || r.size() != 2)
                throw FormatError(fmt::format("range of weight '{}' must be [lo, hi]", w.name));
            w.lo = r[0].get<double>();
            w.hi = r[1].get<double>();
        }
        if (!(w.lo <= w.default_value && w.default_value <= w.hi))
            throw FormatError(fmt::format("default of weight '{}' lies outside its range", w.name));
    }
    return t;
}

} // namespace

json KernelLibrary::to_json() const {
    json ks = json::array();
    for (const auto &k : kernels) {
        ks.push_back({{"id", k.id},
                      {"category", category_name(k.category)},
                      {"signature", k.signature},
                      {"template", template_to_json(k.tmpl)},
                      {"support", k.support}});
    }
    return {{"layout", embedding_layout},
            {"types", vocab.types()},
            {"normalizer", normalizer.to_json()},
            {"kernels", std::move(ks)}};
}

KernelLibrary KernelLibrary::from_json(const json &doc) {
    if (!doc.is_object() || !doc.contains("layout") || !doc.contains("kernels") || !doc["kernels"].is_array())
        throw FormatError("kernel library needs \"layout\" and a \"kernels\" array");
    if (doc["layout"] != embedding_layout)
        throw FormatError(fmt::format("kernel library layout {} is not '{}'", doc["layout"].dump(), embedding_layout));
    if (!doc.contains("types") || !doc.contains("normalizer"))
        throw FormatError("kernel library needs \"types\" and \"normalizer\"");

    KernelLibrary lib;
    try {
        lib.vocab = TypeVocabulary(doc["types"].get<std::vector<std::string>>());
        lib.normalizer = Normalizer::from_json(doc["normalizer"]);
        const std::size_t dim = embedding_dim(lib.vocab);
        if (lib.normalizer.dim() != dim)
            throw FormatError(fmt::format("normalizer has {} dims, layout needs {}", lib.normalizer.dim(), dim));
        int previous_id = -1;
        for (const auto &jk : doc["kernels"]) {
            Kernel k;
            k.id = jk.at("id").get<int>();
            if (k.id <= previous_id)
                throw FormatError("kernels must be sorted by strictly increasing id");
            previous_id = k.id;
            const auto cat = category_from_name(jk.at("category").get<std::string>());
            if (!cat)
                throw FormatError(fmt::format("kernel {} has unknown category", k.id));
            k.category = *cat;
            k.signature = jk.at("signature").get<Vector>();
            if (k.signature.size() != dim)
                throw FormatError(fmt::format("kernel {} signature has {} dims, layout needs {}", k.id,
                                              k.signature.size(), dim));
            k.tmpl = template_from_json(jk.at("template"));
            k.support = jk.at("support").get<int>();
            if (k.support < 1)
                throw FormatError(fmt::format("kernel {} has support < 1", k.id));
            lib.kernels.push_back(std::move(k));
        }
    } catch (const json::exception &e) {
        throw FormatError(fmt::format("malformed kernel library: {}", e.what()));
    }
    return lib;
}

std::string KernelLibrary::dump() const { return to_json().dump(1) + "\n"; }

void KernelLibrary::save(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError(fmt::format("cannot write kernel library '{}'", path.string()));
    out << dump();
}

KernelLibrary KernelLibrary::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(fmt::format("cannot read kernel library '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error &e) {
        throw FormatError(fmt::format("{}: not valid JSON: {}", path.string(), e.what()));
    }
    return from_json(doc);
}

} // namespace kernsched
