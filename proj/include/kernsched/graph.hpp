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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kernsched/error.hpp"

namespace kernsched {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

struct NodeRecord {
    NodeId id = 0;
    std::string op_type;
    int duration = 1;

    bool operator==(const NodeRecord &) const = default;
};

enum class GraphErrorKind { cycle, dangling_edge, missing_capacity, duplicate_id, malformed };

class GraphError : public FormatError {
  public:
    GraphError(GraphErrorKind kind, const std::string &what) : FormatError(what), kind_(kind) {}

    GraphErrorKind graph_error() const noexcept { return kind_; }

  private:
    GraphErrorKind kind_;
};

/**
 * Operation graph with per-type resource capacities.
 *
 * Instances are validated on construction (dense ids, acyclic, no dangling
 * endpoints, a capacity for every used type) and immutable afterwards, so a
 * single Dag can be shared across concurrent scheduling runs.
 */
class Dag {
  public:
    Dag() = default;

    static Dag create(std::vector<NodeRecord> nodes, std::vector<Edge> edges,
                      std::map<std::string, int> capacities);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    const NodeRecord &node(NodeId v) const { return nodes_[static_cast<std::size_t>(v)]; }
    const std::vector<NodeRecord> &nodes() const { return nodes_; }
    const std::vector<Edge> &edges() const { return edges_; }
    const std::map<std::string, int> &capacities() const { return capacities_; }
    int capacity(const std::string &op_type) const;

    std::span<const NodeId> preds(NodeId v) const { return preds_[static_cast<std::size_t>(v)]; }
    std::span<const NodeId> succs(NodeId v) const { return succs_[static_cast<std::size_t>(v)]; }

    /// Kahn order with smallest ready id first.
    const std::vector<NodeId> &topo_order() const { return topo_; }

    /// Distinct op types used by nodes, sorted.
    std::vector<std::string> op_types() const;

    long total_work() const;

    bool operator==(const Dag &other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_ && capacities_ == other.capacities_;
    }

  private:
    std::vector<NodeRecord> nodes_;
    std::vector<Edge> edges_;
    std::map<std::string, int> capacities_;
    std::vector<std::vector<NodeId>> preds_;
    std::vector<std::vector<NodeId>> succs_;
    std::vector<NodeId> topo_;
};

Dag load_dag(std::string_view document);
Dag load_dag_file(const std::filesystem::path &path);

/// Canonical Graph JSON: nodes by id, edges sorted, capacities by type name.
std::string dump_dag(const Dag &dag);
void save_dag_file(const Dag &dag, const std::filesystem::path &path);

/// Subgraph induced by `members`, renumbered by ascending original id.
/// Capacities are inherited unchanged.
Dag induced_subgraph(const Dag &dag, std::span<const NodeId> members);

} // namespace kernsched
