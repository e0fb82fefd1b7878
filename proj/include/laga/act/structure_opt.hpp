#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "laga/act/config.hpp"
#include "laga/core/graph.hpp"

namespace laga::act {

struct EdgeRemoval {
    int u = 0, v = 0;
    double probability = 0.0;
};

struct EdgeAddition {
    int node = 0, peer = 0;          // node is the low-degree endpoint that drew the edge
    double probability = 0.0;
    int degree_before = 0;           // node's degree when the edge was added
};

struct StructureEditResult {
    std::vector<std::pair<int, int>> edges;  // full edge set after editing
    std::vector<EdgeRemoval> removed;
    std::vector<EdgeAddition> added;
};

// Low-confidence intra-community edges are pruned, then nodes under the
// degree ceiling draw their best-scored missing links, community by
// community. Everything outside the flagged communities stays untouched.
inline StructureEditResult optimize_structure(const TextAttributedGraph& g,
                                              const std::vector<std::vector<int>>& flagged,
                                              const EdgeProbFn& edge_prob, const OptimizeConfig& cfg,
                                              bool prune = true, bool add = true) {
    validate(cfg);
    std::set<std::pair<int, int>> edges(g.edges().begin(), g.edges().end());
    std::vector<int> degree(g.n());
    for (int v = 0; v < g.n(); ++v) degree[v] = g.degree(v);
    std::vector<int> community_of(g.n(), -1);
    for (std::size_t c = 0; c < flagged.size(); ++c)
        for (int v : flagged[c]) {
            if (v < 0 || v >= g.n()) throw ActError("optimize_structure: node out of range");
            community_of[v] = static_cast<int>(c);
        }

    StructureEditResult out;
    if (prune) {
        for (const auto& [u, v] : g.edges()) {
            if (community_of[u] < 0 || community_of[u] != community_of[v]) continue;
            const double p = edge_prob(u, v);
            if (p < cfg.tau_edge) {
                edges.erase({u, v});
                degree[u] -= 1;
                degree[v] -= 1;
                out.removed.push_back({u, v, p});
            }
        }
    }

    if (add) {
        for (const auto& community : flagged) {
            for (int i : community) {
                if (degree[i] >= cfg.k_edge) continue;
                std::vector<std::pair<double, int>> candidates;
                for (int j : community) {
                    if (j == i) continue;
                    const auto key = std::minmax(i, j);
                    if (edges.count({key.first, key.second})) continue;
                    const double p = edge_prob(i, j);
                    if (p > cfg.tau_edge) candidates.emplace_back(-p, j);
                }
                std::sort(candidates.begin(), candidates.end());
                for (const auto& [neg_p, j] : candidates) {
                    if (degree[i] >= cfg.k_edge) break;
                    const auto key = std::minmax(i, j);
                    out.added.push_back({i, j, -neg_p, degree[i]});
                    edges.insert({key.first, key.second});
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
    }

    out.edges.assign(edges.begin(), edges.end());
    return out;
}

}  // namespace laga::act
