#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "laga/core/graph.hpp"

namespace laga::detect {

// Newman modularity of a node->community assignment on an unweighted graph.
inline double modularity(const TextAttributedGraph& g, const std::vector<int>& assignment) {
    if (static_cast<int>(assignment.size()) != g.n())
        throw GraphError("modularity: assignment size mismatch");
    if (g.m() == 0) return 0.0;
    const double two_m = 2.0 * g.m();
    std::map<int, double> internal, total_degree;
    for (const auto& [u, v] : g.edges())
        if (assignment[u] == assignment[v]) internal[assignment[u]] += 1.0;
    for (int i = 0; i < g.n(); ++i) total_degree[assignment[i]] += g.degree(i);
    double q = 0.0;
    for (const auto& [c, deg] : total_degree) {
        const double in = internal.count(c) ? internal[c] : 0.0;
        q += in / static_cast<double>(g.m()) - (deg / two_m) * (deg / two_m);
    }
    return q;
}

namespace impl {

struct LevelGraph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, weight), no self entries
    std::vector<double> self_loop;                         // w_ii
    std::vector<double> degree;                            // k_i = sum_j w_ij + 2 w_ii
    double total_weight = 0.0;                             // m_w
};

inline LevelGraph level_from_graph(const TextAttributedGraph& g) {
    LevelGraph lg;
    lg.n = g.n();
    lg.adj.assign(lg.n, {});
    lg.self_loop.assign(lg.n, 0.0);
    for (const auto& [u, v] : g.edges()) {
        lg.adj[u].emplace_back(v, 1.0);
        lg.adj[v].emplace_back(u, 1.0);
    }
    lg.degree.assign(lg.n, 0.0);
    for (int i = 0; i < lg.n; ++i)
        for (const auto& [j, w] : lg.adj[i]) lg.degree[i] += w;
    lg.total_weight = g.m();
    return lg;
}

// One Louvain level: greedy modularity moves with deterministic 0..n-1 sweep
// order; ties keep the current community.
inline bool local_moves(const LevelGraph& lg, std::vector<int>& community) {
    std::vector<double> sigma_tot(lg.n, 0.0);
    for (int i = 0; i < lg.n; ++i) sigma_tot[community[i]] += lg.degree[i];
    const double m_w = lg.total_weight > 0 ? lg.total_weight : 1.0;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (int i = 0; i < lg.n; ++i) {
            const int own = community[i];
            sigma_tot[own] -= lg.degree[i];
            std::map<int, double> weight_to;  // community -> k_{i->c}
            weight_to[own] += 0.0;
            for (const auto& [j, w] : lg.adj[i]) weight_to[community[j]] += w;
            int best = own;
            double best_gain = weight_to[own] - sigma_tot[own] * lg.degree[i] / (2.0 * m_w);
            for (const auto& [c, k_ic] : weight_to) {
                if (c == own) continue;
                const double gain = k_ic - sigma_tot[c] * lg.degree[i] / (2.0 * m_w);
                if (gain > best_gain + 1e-12) {
                    best = c;
                    best_gain = gain;
                }
            }
            sigma_tot[best] += lg.degree[i];
            if (best != own) {
                community[i] = best;
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

inline LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& community,
                            std::vector<int>& renumber) {
    renumber.assign(lg.n, -1);
    int next = 0;
    for (int i = 0; i < lg.n; ++i) {
        if (renumber[community[i]] == -1) renumber[community[i]] = next++;
    }
    LevelGraph out;
    out.n = next;
    out.adj.assign(next, {});
    out.self_loop.assign(next, 0.0);
    std::vector<std::map<int, double>> acc(next);
    for (int i = 0; i < lg.n; ++i) {
        const int ci = renumber[community[i]];
        out.self_loop[ci] += lg.self_loop[i];
        for (const auto& [j, w] : lg.adj[i]) {
            const int cj = renumber[community[j]];
            if (ci == cj) {
                if (i < j) out.self_loop[ci] += w;
            } else {
                acc[ci][cj] += w;
            }
        }
    }
    out.degree.assign(next, 0.0);
    out.total_weight = 0.0;
    for (int c = 0; c < next; ++c) {
        for (const auto& [d, w] : acc[c]) out.adj[c].emplace_back(d, w);
        double k = 2.0 * out.self_loop[c];
        for (const auto& [d, w] : out.adj[c]) k += w;
        out.degree[c] = k;
        out.total_weight += k;
    }
    out.total_weight /= 2.0;
    return out;
}

}  // namespace impl

struct CommunityPartition {
    std::vector<int> assignment;               // node -> community index
    std::vector<std::vector<int>> communities; // ascending members, indexed by smallest member
    double modularity = 0.0;
};

// Deterministic Louvain: fixed sweep order, greedy aggregation until no move
// improves modularity. Isolated nodes stay singleton communities.
inline CommunityPartition louvain_partition(const TextAttributedGraph& g) {
    std::vector<int> assignment(g.n());
    for (int i = 0; i < g.n(); ++i) assignment[i] = i;

    impl::LevelGraph level = impl::level_from_graph(g);
    std::vector<int> level_of_node = assignment;  // node -> current-level vertex
    for (;;) {
        std::vector<int> community(level.n);
        for (int i = 0; i < level.n; ++i) community[i] = i;
        if (!impl::local_moves(level, community)) break;
        std::vector<int> renumber;
        level = impl::aggregate(level, community, renumber);
        for (int v = 0; v < g.n(); ++v) level_of_node[v] = renumber[community[level_of_node[v]]];
        if (level.n <= 1) break;
    }

    // Renumber communities by smallest original member.
    std::map<int, int> first_member;
    for (int v = 0; v < g.n(); ++v)
        if (!first_member.count(level_of_node[v])) first_member[level_of_node[v]] = v;
    std::vector<std::pair<int, int>> order;  // (smallest member, level community)
    for (const auto& [c, v] : first_member) order.emplace_back(v, c);
    std::sort(order.begin(), order.end());
    std::map<int, int> final_id;
    for (std::size_t k = 0; k < order.size(); ++k) final_id[order[k].second] = static_cast<int>(k);

    CommunityPartition out;
    out.assignment.resize(g.n());
    out.communities.resize(order.size());
    for (int v = 0; v < g.n(); ++v) {
        const int c = final_id[level_of_node[v]];
        out.assignment[v] = c;
        out.communities[c].push_back(v);
    }
    out.modularity = modularity(g, out.assignment);
    return out;
}

}  // namespace laga::detect
