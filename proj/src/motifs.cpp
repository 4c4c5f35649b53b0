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

#include "kernsched/motifs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <fmt/format.h>

namespace kernsched {

namespace {

enum class Direction { forward, backward };

/// Nodes within `hops` steps of v along one edge direction, v included.
std::vector<NodeId> ball(const Dag &dag, NodeId v, int hops, Direction dir) {
    std::vector<int> dist(dag.size(), -1);
    std::deque<NodeId> frontier{v};
    dist[static_cast<std::size_t>(v)] = 0;
    std::vector<NodeId> out{v};
    while (!frontier.empty()) {
        const NodeId u = frontier.front();
        frontier.pop_front();
        const int du = dist[static_cast<std::size_t>(u)];
        if (du == hops)
            continue;
        for (const NodeId w : dir == Direction::forward ? dag.succs(u) : dag.preds(u)) {
            if (dist[static_cast<std::size_t>(w)] >= 0)
                continue;
            dist[static_cast<std::size_t>(w)] = du + 1;
            out.push_back(w);
            frontier.push_back(w);
        }
    }
    return out;
}

Motif make_motif(const Dag &dag, MotifCategory category, NodeId anchor, std::vector<NodeId> nodes,
                 const TypeVocabulary &vocab, int source_graph) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    Motif m;
    m.category = category;
    m.anchor = anchor;
    m.source_graph = source_graph;
    m.embedding = embed(induced_subgraph(dag, nodes), vocab);
    m.nodes = std::move(nodes);
    return m;
}

} // namespace

std::vector<Motif> mine_motifs(const Dag &dag, const GraphStats &stats, const MotifConfig &config,
                               const TypeVocabulary &vocab, int source_graph) {
    if (config.hops < 1)
        throw UsageError("motif hop radius must be >= 1");
    const auto n = static_cast<NodeId>(dag.size());
    std::vector<Motif> out;

    for (NodeId v = 0; v < n; ++v) {
        auto nodes = ball(dag, v, config.hops, Direction::forward);
        const auto back = ball(dag, v, config.hops, Direction::backward);
        nodes.insert(nodes.end(), back.begin(), back.end());
        out.push_back(make_motif(dag, MotifCategory::khop, v, std::move(nodes), vocab, source_graph));
    }

    if (n > 0) {
        std::vector<NodeId> by_degree(static_cast<std::size_t>(n));
        for (NodeId v = 0; v < n; ++v)
            by_degree[static_cast<std::size_t>(v)] = v;
        const auto degree = [&](NodeId v) {
            return stats.fanin[static_cast<std::size_t>(v)] + stats.fanout[static_cast<std::size_t>(v)];
        };
        std::stable_sort(by_degree.begin(), by_degree.end(),
                         [&](NodeId a, NodeId b) { return degree(a) > degree(b); });
        const auto count = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(config.centrality_fraction * static_cast<double>(n))));
        std::vector<NodeId> hubs;
        for (std::size_t i = 0; i < count && i < by_degree.size(); ++i)
            if (degree(by_degree[i]) > 0)
                hubs.push_back(by_degree[i]);
        std::sort(hubs.begin(), hubs.end());
        for (const NodeId v : hubs) {
            std::vector<NodeId> nodes{v};
            nodes.insert(nodes.end(), dag.preds(v).begin(), dag.preds(v).end());
            nodes.insert(nodes.end(), dag.succs(v).begin(), dag.succs(v).end());
            out.push_back(make_motif(dag, MotifCategory::high_centrality, v, std::move(nodes), vocab, source_graph));
        }
    }

    const auto reach = reachability(dag);
    for (NodeId v = 0; v < n; ++v) {
        if (stats.reconv[static_cast<std::size_t>(v)] == 0)
            continue;
        const auto children = dag.succs(v);
        const auto region_ball = ball(dag, v, config.hops, Direction::forward);
        boost::dynamic_bitset<> shared(dag.size());
        for (const NodeId x : region_ball) {
            int reached_by = 0;
            for (const NodeId c : children)
                reached_by += reach[static_cast<std::size_t>(c)].test(static_cast<std::size_t>(x)) ? 1 : 0;
            if (reached_by >= 2)
                shared.set(static_cast<std::size_t>(x));
        }
        std::vector<NodeId> nodes{v};
        nodes.insert(nodes.end(), children.begin(), children.end());
        for (const NodeId y : region_ball)
            if (reach[static_cast<std::size_t>(y)].intersects(shared))
                nodes.push_back(y);
        out.push_back(make_motif(dag, MotifCategory::reconvergent, v, std::move(nodes), vocab, source_graph));
    }

    const auto on_chain = [&](NodeId v) { return dag.preds(v).size() <= 1 && dag.succs(v).size() <= 1; };
    for (NodeId v = 0; v < n; ++v) {
        if (!on_chain(v) || (!dag.preds(v).empty() && on_chain(dag.preds(v).front())))
            continue;
        std::vector<NodeId> run{v};
        while (!dag.succs(run.back()).empty() && on_chain(dag.succs(run.back()).front()))
            run.push_back(dag.succs(run.back()).front());
        if (static_cast<int>(run.size()) >= config.chain_min_length)
            out.push_back(make_motif(dag, MotifCategory::chain, v, std::move(run), vocab, source_graph));
    }
    return out;
}

std::vector<Kernel> cluster_motifs(std::span<const Motif> motifs, double threshold, std::size_t budget) {
    if (motifs.empty())
        throw UsageError("cluster_motifs needs at least one motif");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw UsageError(fmt::format("cluster threshold {} outside (0, 1]", threshold));

    struct Cluster {
        MotifCategory category;
        Vector sum;
        Vector centroid;
        int support = 0;
    };
    std::vector<Cluster> clusters;
    for (const auto category : {MotifCategory::khop, MotifCategory::high_centrality, MotifCategory::reconvergent,
                                MotifCategory::chain, MotifCategory::whole_graph}) {
        const std::size_t first = clusters.size();
        for (const auto &m : motifs) {
            if (m.category != category)
                continue;
            Cluster *home = nullptr;
            for (std::size_t c = first; c < clusters.size() && !home; ++c)
                if (cosine_sim(m.embedding, clusters[c].centroid) >= threshold)
                    home = &clusters[c];
            if (!home) {
                clusters.push_back({category, Vector(m.embedding.size(), 0.0), {}, 0});
                home = &clusters.back();
            }
            ++home->support;
            home->centroid.resize(m.embedding.size());
            for (std::size_t i = 0; i < m.embedding.size(); ++i) {
                home->sum[i] += m.embedding[i];
                home->centroid[i] = home->sum[i] / home->support;
            }
        }
    }

    std::vector<std::size_t> order(clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return clusters[a].support > clusters[b].support; });
    order.resize(std::min(order.size(), budget));
    std::sort(order.begin(), order.end());

    std::vector<Kernel> kernels;
    for (const std::size_t c : order) {
        Kernel k;
        k.id = static_cast<int>(kernels.size());
        k.category = clusters[c].category;
        k.signature = clusters[c].centroid;
        k.tmpl = TemplateSpec::defaults_for(family_for_category(k.category));
        k.support = clusters[c].support;
        kernels.push_back(std::move(k));
    }
    return kernels;
}

KernelLibrary build_library(std::span<const Dag> training, const MotifConfig &config, const TypeVocabulary &vocab) {
    std::vector<GraphStats> stats;
    std::vector<Vector> whole;
    stats.reserve(training.size());
    for (const auto &g : training) {
        stats.push_back(analyze(g));
        whole.push_back(embed(g, stats.back(), vocab));
    }
    KernelLibrary lib;
    lib.vocab = vocab;
    lib.normalizer = Normalizer::fit(whole);

    std::vector<Motif> motifs;
    for (std::size_t i = 0; i < training.size(); ++i) {
        auto mined = mine_motifs(training[i], stats[i], config, vocab, static_cast<int>(i));
        for (auto &m : mined) {
            m.embedding = lib.normalizer.apply(m.embedding);
            motifs.push_back(std::move(m));
        }
    }
    lib.kernels = cluster_motifs(motifs, config.cluster_threshold, config.library_budget);
    return lib;
}

KernelLibrary whole_graph_library(std::span<const Dag> training, const TypeVocabulary &vocab,
                                  const Normalizer &normalizer, std::size_t budget) {
    KernelLibrary lib;
    lib.vocab = vocab;
    lib.normalizer = normalizer;
    for (std::size_t i = 0; i < training.size() && i < budget; ++i) {
        Kernel k;
        k.id = static_cast<int>(i);
        k.category = MotifCategory::whole_graph;
        k.signature = normalizer.apply(embed(training[i], vocab));
        k.tmpl = TemplateSpec::defaults_for(TemplateFamily::fanout_aware);
        k.support = 1;
        lib.kernels.push_back(std::move(k));
    }
    return lib;
}

} // namespace kernsched
