#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detail/rng.hpp"
#include "laga/detail/text.hpp"

namespace laga::learn {

struct FeatureMatrix {
    Eigen::MatrixXd rows;      // one row per node
    std::string provenance;    // encoder id and dimensionality
};

// Hashed bag-of-words with tf-idf weighting: each distinct normalized token
// maps to bucket fnv1a(token) % dim with weight tf * ln(1 + |T|/(1 + df)).
// Rows are L2-normalized; the all-zero row of an empty text stays zero.
inline FeatureMatrix encode_features(const std::vector<std::string>& texts, int dim) {
    if (dim < 1) throw GraphError("encode_features: dimension must be positive");
    const auto corpus = detail::build_corpus_stats(texts);
    FeatureMatrix out;
    out.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(texts.size()), dim);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto toks = detail::normalized_tokens(texts[i]);
        if (toks.empty()) continue;
        std::unordered_map<std::string, std::size_t> tf;
        for (const auto& t : toks) tf[t] += 1;
        const double len = static_cast<double>(toks.size());
        for (const auto& [tok, count] : tf) {
            const auto it = corpus.doc_freq.find(tok);
            const double df = it == corpus.doc_freq.end() ? 0.0 : static_cast<double>(it->second);
            const double idf = std::log(1.0 + static_cast<double>(corpus.num_docs) / (1.0 + df));
            const auto bucket = static_cast<Eigen::Index>(detail::fnv1a64(tok) % dim);
            out.rows(static_cast<Eigen::Index>(i), bucket) += count / len * idf;
        }
        const double norm = out.rows.row(static_cast<Eigen::Index>(i)).norm();
        if (norm > 0) out.rows.row(static_cast<Eigen::Index>(i)) /= norm;
    }
    out.provenance = "hashed-tfidf/1 dim=" + std::to_string(dim);
    return out;
}

inline FeatureMatrix encode_graph_features(const TextAttributedGraph& g, int dim) {
    std::vector<std::string> texts;
    texts.reserve(g.n());
    for (const auto& rec : g.nodes()) texts.push_back(rec.text);
    return encode_features(texts, dim);
}

}  // namespace laga::learn
