#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detail/text.hpp"
#include "laga/learn/common.hpp"

namespace laga::learn {

struct AugmentResponse {
    std::string summary;
    std::vector<std::string> keywords;
    int pseudo_label = 0;
};

// Returns nullopt on failure; the node then falls back to the local heuristic.
using AugmentProvider =
    std::function<std::optional<AugmentResponse>(int node, const std::string& text)>;

struct Augmentation {
    std::vector<std::string> summaries;
    std::vector<std::vector<std::string>> keywords;
    Eigen::MatrixXd y_pseudo;          // n x d, rows sum to 1
    std::vector<std::string> enriched;  // text + summary + keywords
    std::vector<bool> from_fallback;
    int provider_failures = 0;
};

// pseudo_classes carries the detection stage's per-node cluster-majority
// class; nodes without one (or with empty text) get a uniform pseudo label.
inline Augmentation augment_texts(const TextAttributedGraph& g,
                                  const std::vector<std::optional<int>>& pseudo_classes,
                                  const AugmentProvider& provider = nullptr) {
    const int n = g.n();
    const int d = g.num_classes();
    if (!pseudo_classes.empty() && static_cast<int>(pseudo_classes.size()) != n)
        throw TrainingError("augment_texts: pseudo class list size mismatch");

    std::vector<std::string> texts;
    texts.reserve(n);
    for (int v = 0; v < n; ++v) texts.push_back(g.node(v).text);
    const auto stats = detail::build_corpus_stats(texts);

    Augmentation out;
    out.summaries.resize(n);
    out.keywords.resize(n);
    out.enriched.resize(n);
    out.from_fallback.assign(n, false);
    out.y_pseudo = Eigen::MatrixXd::Constant(n, d, 1.0 / d);

    for (int v = 0; v < n; ++v) {
        const std::string& text = texts[v];
        std::optional<AugmentResponse> resp;
        if (provider) {
            resp = provider(v, text);
            if (!resp) out.provider_failures += 1;
        }
        if (resp) {
            out.summaries[v] = resp->summary;
            out.keywords[v] = resp->keywords;
            if (resp->pseudo_label >= 0 && resp->pseudo_label < d) {
                out.y_pseudo.row(v).setZero();
                out.y_pseudo(v, resp->pseudo_label) = 1.0;
            }
        } else {
            out.from_fallback[v] = true;
            const bool empty = detail::normalized_tokens(text).empty();
            if (!empty) {
                out.summaries[v] = detail::leading_sentences(text, 2);
                out.keywords[v] = detail::top_keywords(text, stats, 5);
                if (!pseudo_classes.empty() && pseudo_classes[v] &&
                    *pseudo_classes[v] >= 0 && *pseudo_classes[v] < d) {
                    out.y_pseudo.row(v).setZero();
                    out.y_pseudo(v, *pseudo_classes[v]) = 1.0;
                }
            }
        }
        std::string enriched = text;
        if (!out.summaries[v].empty()) {
            if (!enriched.empty()) enriched += ' ';
            enriched += out.summaries[v];
        }
        if (!out.keywords[v].empty()) {
            if (!enriched.empty()) enriched += ' ';
            enriched += detail::join_tokens(out.keywords[v]);
        }
        out.enriched[v] = std::move(enriched);
    }
    return out;
}

}  // namespace laga::learn
