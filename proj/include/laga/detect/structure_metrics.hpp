#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detect/config.hpp"
#include "laga/detect/louvain.hpp"

namespace laga::detect {

struct CommunityStats {
    int size = 0;
    int internal_edges = 0;
    double mean_degree = 0.0;       // full-graph degrees averaged over members
    double density = 0.0;           // 2|E_k| / (|C_k| (|C_k|-1))
    double structural_entropy = 0.0;
    double mean_jaccard = 0.0;      // over internal edges, full neighborhoods
    bool density_defined = true;    // false for singleton communities
    bool entropy_defined = true;    // false when member degrees are all zero
    bool jaccard_defined = true;    // false without internal edges
    bool sparse = false;
    bool noisy = false;
};

struct StructureDiagnostics {
    std::vector<CommunityStats> communities;
    double degree_variance = 0.0;   // population variance of degrees
    double degree_gini = 0.0;
    bool imbalanced = false;
    std::vector<int> sparse_communities, noisy_communities;
};

inline double jaccard_neighbors(const TextAttributedGraph& g, int u, int v) {
    const auto& a = g.neighbors(u);
    const auto& b = g.neighbors(v);
    std::size_t inter = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++inter; ++i; ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double degree_gini(const std::vector<double>& degrees) {
    const std::size_t n = degrees.size();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (double d : degrees) total += d;
    if (total <= 0.0) return 0.0;
    std::vector<double> sorted = degrees;
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * sorted[i];
    return acc / (static_cast<double>(n) * total);
}

inline StructureDiagnostics compute_structure_diagnostics(const TextAttributedGraph& g,
                                                          const CommunityPartition& partition,
                                                          const DetectionConfig& cfg) {
    StructureDiagnostics out;
    out.communities.resize(partition.communities.size());

    for (std::size_t k = 0; k < partition.communities.size(); ++k) {
        const auto& members = partition.communities[k];
        CommunityStats& cs = out.communities[k];
        cs.size = static_cast<int>(members.size());

        double vol = 0.0;
        for (int v : members) {
            cs.mean_degree += g.degree(v);
            vol += g.degree(v);
        }
        if (cs.size > 0) cs.mean_degree /= cs.size;

        double jaccard_sum = 0.0;
        for (int v : members) {
            for (int u : g.neighbors(v)) {
                if (u <= v || partition.assignment[u] != partition.assignment[v]) continue;
                cs.internal_edges += 1;
                jaccard_sum += jaccard_neighbors(g, v, u);
            }
        }

        if (cs.size >= 2) {
            cs.density = 2.0 * cs.internal_edges /
                         (static_cast<double>(cs.size) * (cs.size - 1));
        } else {
            cs.density_defined = false;
        }

        if (vol > 0.0) {
            for (int v : members) {
                const double p = g.degree(v) / vol;
                if (p > 0.0) cs.structural_entropy -= p * std::log(p);
            }
        } else {
            cs.entropy_defined = false;
        }

        if (cs.internal_edges > 0) {
            cs.mean_jaccard = jaccard_sum / cs.internal_edges;
        } else {
            cs.jaccard_defined = false;
        }

        cs.sparse = cs.mean_degree < cfg.mean_degree_ref ||
                    (cs.density_defined && cs.density < cfg.density_ref);
        const double entropy_cap = cfg.entropy_ref * std::log(std::max(cs.size, 1));
        cs.noisy = (cs.entropy_defined && cs.structural_entropy > entropy_cap + 1e-12) ||
                   (cs.jaccard_defined && cs.mean_jaccard < cfg.jaccard_ref);
        if (cs.sparse) out.sparse_communities.push_back(static_cast<int>(k));
        if (cs.noisy) out.noisy_communities.push_back(static_cast<int>(k));
    }

    std::vector<double> degrees(g.n());
    double mean = 0.0;
    for (int v = 0; v < g.n(); ++v) {
        degrees[v] = g.degree(v);
        mean += degrees[v];
    }
    if (g.n() > 0) {
        mean /= g.n();
        for (double d : degrees) out.degree_variance += (d - mean) * (d - mean);
        out.degree_variance /= g.n();
    }
    out.degree_gini = degree_gini(degrees);
    out.imbalanced = out.degree_gini > cfg.gini_ref;
    return out;
}

}  // namespace laga::detect
