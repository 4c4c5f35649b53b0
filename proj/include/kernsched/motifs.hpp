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
#include <vector>

#include "kernsched/kernel.hpp"

namespace kernsched {

struct MotifConfig {
    int hops = 2;                    ///< k for k-hop and reconvergent regions
    int chain_min_length = 4;
    double centrality_fraction = 0.1; ///< top share of nodes by fanin+fanout
    double cluster_threshold = 0.95;
    std::size_t library_budget = 50;
};

struct Motif {
    MotifCategory category = MotifCategory::khop;
    NodeId anchor = 0;
    std::vector<NodeId> nodes; ///< sorted ids in the source graph
    int source_graph = 0;
    Vector embedding; ///< embedding of the induced subgraph
};

/**
 * Deterministic motif extraction from one graph:
 *   khop             forward and backward k-hop ball of every node
 *   high_centrality  1-hop ball of the top-degree nodes (degree > 0)
 *   reconvergent     v, its children and the part of v's forward k-hop ball
 *                    leading to a descendant shared by two children (R(v) > 0)
 *   chain            maximal runs of nodes with in/out degree <= 1, length >= min
 * Ordered by category, then anchor id. Embeddings are raw (not normalized).
 */
std::vector<Motif> mine_motifs(const Dag &dag, const GraphStats &stats, const MotifConfig &config,
                               const TypeVocabulary &vocab, int source_graph = 0);

/**
 * Greedy leader clustering per category over (already normalized) motif
 * embeddings, in input order. Each cluster becomes a kernel whose signature
 * is the member mean; the highest-support clusters are kept up to `budget`
 * and numbered in category/creation order.
 */
std::vector<Kernel> cluster_motifs(std::span<const Motif> motifs, double threshold, std::size_t budget);

/// Fit the normalizer on the training graphs, mine, normalize and cluster.
KernelLibrary build_library(std::span<const Dag> training, const MotifConfig &config,
                            const TypeVocabulary &vocab);

/// No-motif ablation library: one fanout_aware kernel per training graph
/// with the whole-graph signature, capped at `budget`.
KernelLibrary whole_graph_library(std::span<const Dag> training, const TypeVocabulary &vocab,
                                  const Normalizer &normalizer, std::size_t budget);

} // namespace kernsched
