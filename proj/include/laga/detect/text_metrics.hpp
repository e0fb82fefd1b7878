#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detail/text.hpp"
#include "laga/detect/config.hpp"

namespace laga::detect {

struct TextDiagnostics {
    std::vector<int> token_counts;
    std::vector<double> noise_rate;        // fraction of malformed/out-of-vocabulary tokens
    std::vector<double> informativeness;   // mean tf-idf over token occurrences
    std::vector<bool> sparse, noisy, uninformative;
    double tau_informativeness_effective = 0.0;
    detail::CorpusStats corpus;
};

namespace impl {

inline double noise_rate_of(const std::string& text, const detail::CorpusStats& corpus) {
    const auto raw = detail::split_tokens(text);
    if (raw.empty()) return 0.0;
    std::size_t errors = 0;
    for (const auto& tok : raw) {
        if (detail::is_garbage_token(tok)) {
            ++errors;
            continue;
        }
        const auto norm = detail::normalize_token(tok);
        if (!corpus.in_vocabulary(norm)) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(raw.size());
}

}  // namespace impl

// Corpus-relative text quality: sparsity by token count, noise by the rate of
// garbage or out-of-vocabulary tokens, informativeness by mean tf-idf. The
// informativeness threshold defaults to a corpus percentile so "uninformative"
// always means "in the low tail of this corpus".
inline TextDiagnostics compute_text_diagnostics(const TextAttributedGraph& g,
                                                const DetectionConfig& cfg) {
    TextDiagnostics d;
    std::vector<std::string> texts;
    texts.reserve(g.n());
    for (const auto& rec : g.nodes()) texts.push_back(rec.text);
    d.corpus = detail::build_corpus_stats(texts);

    d.token_counts.resize(g.n());
    d.noise_rate.resize(g.n());
    d.informativeness.resize(g.n());
    for (int i = 0; i < g.n(); ++i) {
        d.token_counts[i] = static_cast<int>(detail::split_tokens(texts[i]).size());
        d.noise_rate[i] = impl::noise_rate_of(texts[i], d.corpus);
        d.informativeness[i] = detail::informativeness(texts[i], d.corpus);
    }

    if (cfg.tau_informativeness) {
        d.tau_informativeness_effective = *cfg.tau_informativeness;
    } else if (g.n() > 0) {
        std::vector<double> sorted = d.informativeness;
        std::sort(sorted.begin(), sorted.end());
        const auto idx = static_cast<std::size_t>(
            cfg.informativeness_percentile * static_cast<double>(sorted.size()));
        d.tau_informativeness_effective = sorted[std::min(idx, sorted.size() - 1)];
    }

    d.sparse.resize(g.n());
    d.noisy.resize(g.n());
    d.uninformative.resize(g.n());
    for (int i = 0; i < g.n(); ++i) {
        d.sparse[i] = d.token_counts[i] < cfg.tau_sparse_tokens;
        d.noisy[i] = d.noise_rate[i] > cfg.tau_noise;
        d.uninformative[i] = d.informativeness[i] < d.tau_informativeness_effective;
    }
    return d;
}

}  // namespace laga::detect
