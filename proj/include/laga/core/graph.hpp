#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace laga {

class GraphError : public std::runtime_error {
public:
    explicit GraphError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Split { train, validation, test, unlabeled };

inline const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::unlabeled: return "unlabeled";
    }
    throw GraphError("invalid split value");
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "validation") return Split::validation;
    if (s == "test") return Split::test;
    if (s == "unlabeled") return Split::unlabeled;
    throw GraphError("unknown split '" + s + "'");
}

struct NodeRecord {
    int id = 0;
    std::string text;
    std::optional<int> label;
    Split split = Split::unlabeled;
    bool generated = false;

    bool operator==(const NodeRecord&) const = default;
};

struct GraphMetadata {
    std::string name = "graph";

    bool operator==(const GraphMetadata&) const = default;
};

// Undirected text-attributed graph with dense node ids 0..n-1, a canonical
// (u < v, sorted) edge list and no self-loops. Instances are immutable;
// edits go through copies of the node and edge vectors.
class TextAttributedGraph {
public:
    TextAttributedGraph() = default;

    static TextAttributedGraph create(std::vector<NodeRecord> nodes,
                                      std::vector<std::pair<int, int>> edges, int num_classes,
                                      GraphMetadata meta = {}) {
        TextAttributedGraph g;
        g.meta_ = std::move(meta);
        if (num_classes < 1) throw GraphError("num_classes must be positive");
        g.num_classes_ = num_classes;

        const int n = static_cast<int>(nodes.size());
        std::sort(nodes.begin(), nodes.end(),
                  [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });
        for (int i = 0; i < n; ++i) {
            const auto& rec = nodes[i];
            if (rec.id != i) {
                if (i > 0 && nodes[i - 1].id == rec.id)
                    throw GraphError("duplicate node id " + std::to_string(rec.id));
                throw GraphError("node ids are not dense: expected " + std::to_string(i) +
                                 ", found " + std::to_string(rec.id));
            }
            if (rec.label && (*rec.label < 0 || *rec.label >= num_classes))
                throw GraphError("node " + std::to_string(rec.id) + ": label " +
                                 std::to_string(*rec.label) + " outside [0, " +
                                 std::to_string(num_classes) + ")");
        }
        g.nodes_ = std::move(nodes);

        for (auto& [u, v] : edges) {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw GraphError("edge endpoint outside node range: (" + std::to_string(u) + ", " +
                                 std::to_string(v) + ")");
            if (u == v) throw GraphError("self-loop at node " + std::to_string(u));
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        g.edges_ = std::move(edges);

        g.adj_.assign(n, {});
        for (const auto& [u, v] : g.edges_) {
            g.adj_[u].push_back(v);
            g.adj_[v].push_back(u);
        }
        for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
        return g;
    }

    int n() const { return static_cast<int>(nodes_.size()); }
    int m() const { return static_cast<int>(edges_.size()); }
    int num_classes() const { return num_classes_; }
    const GraphMetadata& metadata() const { return meta_; }

    const NodeRecord& node(int i) const { return nodes_.at(i); }
    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int i) const { return adj_.at(i); }
    int degree(int i) const { return static_cast<int>(adj_.at(i).size()); }

    bool has_edge(int u, int v) const {
        if (u == v) return false;
        const auto& nb = adj_.at(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    // Supervision visible to detection, planning and repair: train-split
    // nodes that carry a label. Validation/test labels stay hidden.
    std::optional<int> visible_label(int i) const {
        const auto& rec = node(i);
        if (rec.split == Split::train && rec.label) return rec.label;
        return std::nullopt;
    }

    std::vector<int> visible_labeled_nodes() const {
        std::vector<int> out;
        for (int i = 0; i < n(); ++i)
            if (visible_label(i)) out.push_back(i);
        return out;
    }

    std::vector<int> split_nodes(Split s) const {
        std::vector<int> out;
        for (int i = 0; i < n(); ++i)
            if (nodes_[i].split == s) out.push_back(i);
        return out;
    }

    // Counts of visible labels per class.
    std::vector<int> visible_class_counts() const {
        std::vector<int> counts(num_classes_, 0);
        for (int i = 0; i < n(); ++i)
            if (auto y = visible_label(i)) counts[*y] += 1;
        return counts;
    }

    std::vector<NodeRecord> copy_nodes() const { return nodes_; }
    std::vector<std::pair<int, int>> copy_edges() const { return edges_; }

    TextAttributedGraph with_nodes(std::vector<NodeRecord> nodes) const {
        return create(std::move(nodes), edges_, num_classes_, meta_);
    }
    TextAttributedGraph with_edges(std::vector<std::pair<int, int>> edges) const {
        return create(nodes_, std::move(edges), num_classes_, meta_);
    }

    bool operator==(const TextAttributedGraph& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_ &&
               num_classes_ == other.num_classes_ && meta_ == other.meta_;
    }

private:
    std::vector<NodeRecord> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
    int num_classes_ = 1;
    GraphMetadata meta_;
};

struct SubgraphPart {
    TextAttributedGraph graph;
    // index_map[local id] = original id; generated nodes appended later by
    // edits have local ids beyond this map.
    std::vector<int> index_map;
};

inline SubgraphPart induced_subgraph(const TextAttributedGraph& g, std::vector<int> node_ids) {
    std::sort(node_ids.begin(), node_ids.end());
    node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
    std::vector<int> local(g.n(), -1);
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        const int orig = node_ids[i];
        if (orig < 0 || orig >= g.n())
            throw GraphError("induced_subgraph: node " + std::to_string(orig) + " out of range");
        local[orig] = static_cast<int>(i);
    }
    std::vector<NodeRecord> nodes;
    nodes.reserve(node_ids.size());
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        NodeRecord rec = g.node(node_ids[i]);
        rec.id = static_cast<int>(i);
        nodes.push_back(std::move(rec));
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [u, v] : g.edges())
        if (local[u] >= 0 && local[v] >= 0) edges.emplace_back(local[u], local[v]);
    SubgraphPart part;
    part.graph = TextAttributedGraph::create(std::move(nodes), std::move(edges), g.num_classes(),
                                             g.metadata());
    part.index_map = std::move(node_ids);
    return part;
}

struct PartitionResult {
    std::vector<SubgraphPart> parts;
    // Original-id edges whose endpoints fall in different parts; restored
    // verbatim at merge time.
    std::vector<std::pair<int, int>> cross_edges;
};

inline PartitionResult partition_by_node_sets(const TextAttributedGraph& g,
                                              const std::vector<std::vector<int>>& node_sets) {
    PartitionResult out;
    std::vector<int> owner(g.n(), -1);
    for (std::size_t p = 0; p < node_sets.size(); ++p) {
        for (int v : node_sets[p]) {
            if (v < 0 || v >= g.n())
                throw GraphError("partition: node " + std::to_string(v) + " out of range");
            if (owner[v] != -1)
                throw GraphError("partition: node " + std::to_string(v) + " assigned twice");
            owner[v] = static_cast<int>(p);
        }
    }
    for (int v = 0; v < g.n(); ++v)
        if (owner[v] == -1) throw GraphError("partition: node " + std::to_string(v) + " unassigned");
    for (const auto& s : node_sets) out.parts.push_back(induced_subgraph(g, s));
    for (const auto& [u, v] : g.edges())
        if (owner[u] != owner[v]) out.cross_edges.emplace_back(u, v);
    return out;
}

// Reassembles a graph from edited parts. Mapped local nodes return to their
// original ids; unmapped (generated) nodes receive fresh ids after
// original_n. Cross-part edges captured at partition time are restored.
inline TextAttributedGraph merge_subgraphs(const std::vector<SubgraphPart>& parts,
                                           const std::vector<std::pair<int, int>>& cross_edges,
                                           int original_n, int num_classes,
                                           const GraphMetadata& meta) {
    std::vector<NodeRecord> nodes(original_n);
    std::vector<bool> seen(original_n, false);
    std::vector<std::pair<int, int>> edges;
    int next_id = original_n;

    for (const auto& part : parts) {
        const int mapped = static_cast<int>(part.index_map.size());
        if (mapped > part.graph.n())
            throw GraphError("merge: index map larger than part");
        std::vector<int> to_original(part.graph.n(), -1);
        for (int local = 0; local < mapped; ++local) {
            const int orig = part.index_map[local];
            if (orig < 0 || orig >= original_n)
                throw GraphError("merge: mapped id " + std::to_string(orig) + " out of range");
            if (seen[orig])
                throw GraphError("merge: original id " + std::to_string(orig) +
                                 " covered by two parts");
            seen[orig] = true;
            to_original[local] = orig;
        }
        for (int local = mapped; local < part.graph.n(); ++local) to_original[local] = next_id++;
        for (int local = 0; local < part.graph.n(); ++local) {
            NodeRecord rec = part.graph.node(local);
            rec.id = to_original[local];
            if (rec.id >= original_n) {
                nodes.push_back(std::move(rec));
            } else {
                nodes[rec.id] = std::move(rec);
            }
        }
        for (const auto& [u, v] : part.graph.edges())
            edges.emplace_back(to_original[u], to_original[v]);
    }
    for (int orig = 0; orig < original_n; ++orig)
        if (!seen[orig])
            throw GraphError("merge: original id " + std::to_string(orig) + " missing from parts");
    for (const auto& e : cross_edges) edges.push_back(e);
    return TextAttributedGraph::create(std::move(nodes), std::move(edges), num_classes, meta);
}

}  // namespace laga
