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

#include "kernsched/graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace kernsched {

using json = nlohmann::json;

Dag Dag::create(std::vector<NodeRecord> nodes, std::vector<Edge> edges,
                std::map<std::string, int> capacities) {
    std::sort(nodes.begin(), nodes.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0 && nodes[i].id == nodes[i - 1].id)
            throw GraphError(GraphErrorKind::duplicate_id, fmt::format("duplicate node id {}", nodes[i].id));
        if (nodes[i].id != static_cast<NodeId>(i))
            throw GraphError(GraphErrorKind::malformed,
                             fmt::format("node ids must be dense 0..{}; found id {}", nodes.size() - 1, nodes[i].id));
        if (nodes[i].duration < 1)
            throw GraphError(GraphErrorKind::malformed,
                             fmt::format("node {} has non-positive duration {}", nodes[i].id, nodes[i].duration));
        if (nodes[i].op_type.empty())
            throw GraphError(GraphErrorKind::malformed, fmt::format("node {} has an empty type", nodes[i].id));
    }
    for (const auto &[type, cap] : capacities) {
        if (cap < 1)
            throw GraphError(GraphErrorKind::malformed, fmt::format("capacity of type '{}' must be positive", type));
    }
    for (const auto &n : nodes) {
        if (!capacities.contains(n.op_type))
            throw GraphError(GraphErrorKind::missing_capacity,
                             fmt::format("no capacity for type '{}' (node {})", n.op_type, n.id));
    }

    const auto n = static_cast<NodeId>(nodes.size());
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto [u, v] = edges[i];
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw GraphError(GraphErrorKind::dangling_edge,
                             fmt::format("edge ({}, {}) references a missing node", u, v));
        if (u == v)
            throw GraphError(GraphErrorKind::cycle, fmt::format("cycle detected: self-loop on node {}", u));
        if (i > 0 && edges[i] == edges[i - 1])
            throw GraphError(GraphErrorKind::malformed, fmt::format("duplicate edge ({}, {})", u, v));
    }

    Dag dag;
    dag.nodes_ = std::move(nodes);
    dag.edges_ = std::move(edges);
    dag.capacities_ = std::move(capacities);
    dag.preds_.resize(dag.nodes_.size());
    dag.succs_.resize(dag.nodes_.size());
    for (const auto &[u, v] : dag.edges_) {
        dag.succs_[static_cast<std::size_t>(u)].push_back(v);
        dag.preds_[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto &p : dag.preds_)
        std::sort(p.begin(), p.end());

    std::vector<int> indeg(dag.nodes_.size());
    for (std::size_t v = 0; v < indeg.size(); ++v)
        indeg[v] = static_cast<int>(dag.preds_[v].size());
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < n; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0)
            ready.push(v);
    dag.topo_.reserve(dag.nodes_.size());
    while (!ready.empty()) {
        const NodeId v = ready.top();
        ready.pop();
        dag.topo_.push_back(v);
        for (const NodeId w : dag.succs(v))
            if (--indeg[static_cast<std::size_t>(w)] == 0)
                ready.push(w);
    }
    if (dag.topo_.size() != dag.nodes_.size())
        throw GraphError(GraphErrorKind::cycle,
                         fmt::format("cycle detected: {} node(s) lie on or behind a cycle",
                                     dag.nodes_.size() - dag.topo_.size()));
    return dag;
}

int Dag::capacity(const std::string &op_type) const {
    const auto it = capacities_.find(op_type);
    if (it == capacities_.end())
        throw GraphError(GraphErrorKind::missing_capacity, fmt::format("no capacity for type '{}'", op_type));
    return it->second;
}

std::vector<std::string> Dag::op_types() const {
    std::set<std::string> types;
    for (const auto &n : nodes_)
        types.insert(n.op_type);
    return {types.begin(), types.end()};
}

long Dag::total_work() const {
    long work = 0;
    for (const auto &n : nodes_)
        work += n.duration;
    return work;
}

namespace {

int as_int(const json &value, const char *what) {
    if (!value.is_number_integer())
        throw GraphError(GraphErrorKind::malformed, fmt::format("{} must be an integer", what));
    const auto wide = value.get<long long>();
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max())
        throw GraphError(GraphErrorKind::malformed, fmt::format("{} is out of range", what));
    return static_cast<int>(wide);
}

} // namespace

Dag load_dag(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error &e) {
        throw GraphError(GraphErrorKind::malformed, fmt::format("graph document is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges") || !doc.contains("capacities"))
        throw GraphError(GraphErrorKind::malformed, "graph document needs \"nodes\", \"edges\" and \"capacities\"");
    if (!doc["nodes"].is_array() || !doc["edges"].is_array() || !doc["capacities"].is_object())
        throw GraphError(GraphErrorKind::malformed, "graph document fields have the wrong JSON types");

    std::vector<NodeRecord> nodes;
    for (const auto &jn : doc["nodes"]) {
        if (!jn.is_object() || !jn.contains("id") || !jn.contains("type") || !jn.contains("duration") ||
            !jn["type"].is_string())
            throw GraphError(GraphErrorKind::malformed, "node entries need integer id, string type, integer duration");
        nodes.push_back({as_int(jn["id"], "node id"), jn["type"].get<std::string>(),
                         as_int(jn["duration"], "node duration")});
    }
    std::vector<Edge> edges;
    for (const auto &je : doc["edges"]) {
        if (!je.is_array() || je.size() != 2)
            throw GraphError(GraphErrorKind::malformed, "edges must be [pred, succ] pairs");
        edges.emplace_back(as_int(je[0], "edge endpoint"), as_int(je[1], "edge endpoint"));
    }
    std::map<std::string, int> capacities;
    for (const auto &[type, cap] : doc["capacities"].items())
        capacities[type] = as_int(cap, "capacity");
    return Dag::create(std::move(nodes), std::move(edges), std::move(capacities));
}

Dag load_dag_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(fmt::format("cannot read graph file '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_dag(buf.str());
    } catch (const GraphError &e) {
        throw GraphError(e.graph_error(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string dump_dag(const Dag &dag) {
    std::string out = "{\n  \"nodes\": [";
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const auto &n = dag.nodes()[i];
        out += fmt::format("{}\n    {{\"id\": {}, \"type\": {}, \"duration\": {}}}", i ? "," : "", n.id,
                           json(n.op_type).dump(), n.duration);
    }
    out += dag.empty() ? "],\n" : "\n  ],\n";
    out += "  \"edges\": [";
    for (std::size_t i = 0; i < dag.edges().size(); ++i) {
        const auto &[u, v] = dag.edges()[i];
        out += fmt::format("{}[{}, {}]", i ? ", " : "", u, v);
    }
    out += "],\n  \"capacities\": {";
    bool first = true;
    for (const auto &[type, cap] : dag.capacities()) {
        out += fmt::format("{}{}: {}", first ? "" : ", ", json(type).dump(), cap);
        first = false;
    }
    out += "}\n}\n";
    return out;
}

void save_dag_file(const Dag &dag, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError(fmt::format("cannot write graph file '{}'", path.string()));
    out << dump_dag(dag);
}

Dag induced_subgraph(const Dag &dag, std::span<const NodeId> members) {
    std::vector<NodeId> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<NodeId> remap(dag.size(), -1);
    std::vector<NodeRecord> nodes;
    nodes.reserve(sorted.size());
    for (const NodeId v : sorted) {
        remap[static_cast<std::size_t>(v)] = static_cast<NodeId>(nodes.size());
        nodes.push_back({static_cast<NodeId>(nodes.size()), dag.node(v).op_type, dag.node(v).duration});
    }
    std::vector<Edge> edges;
    for (const auto &[u, v] : dag.edges()) {
        const NodeId a = remap[static_cast<std::size_t>(u)];
        const NodeId b = remap[static_cast<std::size_t>(v)];
        if (a >= 0 && b >= 0)
            edges.emplace_back(a, b);
    }
    return Dag::create(std::move(nodes), std::move(edges), dag.capacities());
}

} // namespace kernsched
