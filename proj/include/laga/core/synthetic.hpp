#pragma once

#include <string>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detail/rng.hpp"
#include "laga/detail/text.hpp"

namespace laga {

struct SyntheticSpec {
    int num_classes = 4;
    int nodes_per_class = 75;
    double p_intra = 0.15;          // edge probability within a class
    double p_inter = 0.01;          // edge probability across classes
    int min_tokens = 8;
    int max_tokens = 12;
    int class_vocabulary = 12;      // distinct keywords per class
    int shared_vocabulary = 30;     // corpus-wide filler words
    double keyword_share = 0.7;     // probability a token is class-specific
    double train_fraction = 0.6;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
    std::string name = "synthetic";
};

// Stochastic block model with class-correlated texts: nodes of one class link
// densely, and their texts draw most tokens from a class keyword pool.
inline TextAttributedGraph make_synthetic_tag(const SyntheticSpec& spec) {
    if (spec.num_classes < 1 || spec.nodes_per_class < 1)
        throw GraphError("synthetic fixture: class layout must be positive");
    auto rng = detail::RngStream(spec.seed).derive("synthetic");
    auto text_rng = rng.derive("text");
    auto edge_rng = rng.derive("edges");
    auto split_rng = rng.derive("splits");

    const int n = spec.num_classes * spec.nodes_per_class;
    std::vector<NodeRecord> nodes(n);

    std::vector<std::vector<std::string>> class_words(spec.num_classes);
    for (int c = 0; c < spec.num_classes; ++c)
        for (int w = 0; w < spec.class_vocabulary; ++w)
            class_words[c].push_back("topic" + std::to_string(c) + "word" + std::to_string(w));
    std::vector<std::string> shared_words;
    for (int w = 0; w < spec.shared_vocabulary; ++w)
        shared_words.push_back("common" + std::to_string(w));

    for (int v = 0; v < n; ++v) {
        const int c = v / spec.nodes_per_class;
        nodes[v].id = v;
        nodes[v].label = c;
        const int span = spec.max_tokens - spec.min_tokens + 1;
        const int len = spec.min_tokens + static_cast<int>(text_rng.below(span));
        std::vector<std::string> toks;
        toks.reserve(len);
        for (int t = 0; t < len; ++t) {
            if (text_rng.next_double() < spec.keyword_share) {
                toks.push_back(class_words[c][text_rng.below(class_words[c].size())]);
            } else {
                toks.push_back(shared_words[text_rng.below(shared_words.size())]);
            }
        }
        nodes[v].text = detail::join_tokens(toks);
    }

    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u + 1 < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const bool same = u / spec.nodes_per_class == v / spec.nodes_per_class;
            const double p = same ? spec.p_intra : spec.p_inter;
            if (edge_rng.next_double() < p) edges.emplace_back(u, v);
        }
    }

    std::vector<int> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    split_rng.shuffle(order);
    const int train_end = static_cast<int>(spec.train_fraction * n);
    const int val_end = train_end + static_cast<int>(spec.validation_fraction * n);
    for (int i = 0; i < n; ++i) {
        if (i < train_end)
            nodes[order[i]].split = Split::train;
        else if (i < val_end)
            nodes[order[i]].split = Split::validation;
        else
            nodes[order[i]].split = Split::test;
    }

    GraphMetadata meta;
    meta.name = spec.name;
    return TextAttributedGraph::create(std::move(nodes), std::move(edges), spec.num_classes, meta);
}

}  // namespace laga
