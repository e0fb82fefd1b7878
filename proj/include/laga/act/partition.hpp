#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <vector>

#include "laga/act/config.hpp"
#include "laga/core/graph.hpp"
#include "laga/detail/rng.hpp"
#include "laga/detect/louvain.hpp"

namespace laga::act {

// Optimizes one partition; receives a seed derived for that part.
using LocalOptimizer =
    std::function<TextAttributedGraph(const TextAttributedGraph&, std::uint64_t)>;

namespace impl {

// Largest-first balancing of detected communities over p buckets. Each
// community lands in the currently lightest bucket, so community edges never
// cross a part boundary.
inline std::vector<std::vector<int>> balance_communities(
    const std::vector<std::vector<int>>& communities, int p) {
    std::vector<std::size_t> order(communities.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (communities[a].size() != communities[b].size())
            return communities[a].size() > communities[b].size();
        return communities[a].front() < communities[b].front();
    });
    std::vector<std::vector<int>> buckets(p);
    std::vector<std::size_t> load(p, 0);
    for (std::size_t c : order) {
        const int target = static_cast<int>(
            std::min_element(load.begin(), load.end()) - load.begin());
        buckets[target].insert(buckets[target].end(), communities[c].begin(),
                               communities[c].end());
        load[target] += communities[c].size();
    }
    for (auto& b : buckets) std::sort(b.begin(), b.end());
    return buckets;
}

}  // namespace impl

// Splits the graph along community lines into p balanced parts, runs the
// optimizer on each and reassembles the result. Cross-part edges survive
// untouched; nodes generated inside a part receive fresh ids after the
// original range.
inline TextAttributedGraph partitioned_optimize(const TextAttributedGraph& g, int p,
                                                const LocalOptimizer& inner,
                                                std::uint64_t seed) {
    if (!inner) throw ActError("partitioned_optimize: missing optimizer");
    if (p <= 1 || g.n() == 0) return inner(g, seed);

    const auto partition = detect::louvain_partition(g);
    const int available = static_cast<int>(partition.communities.size());
    if (p > available) {
        std::cerr << "partitioned_optimize: requested " << p << " parts but only " << available
                  << " communities exist; using " << available << "\n";
        p = available;
    }
    if (p <= 1) return inner(g, seed);

    const auto buckets = impl::balance_communities(partition.communities, p);
    auto split = partition_by_node_sets(g, buckets);

    const detail::RngStream root(seed);
    for (std::size_t idx = 0; idx < split.parts.size(); ++idx) {
        auto& part = split.parts[idx];
        part.graph = inner(part.graph, root.derive("part", idx).seed());
    }
    return merge_subgraphs(split.parts, split.cross_edges, g.n(), g.num_classes(),
                           g.metadata());
}

}  // namespace laga::act
