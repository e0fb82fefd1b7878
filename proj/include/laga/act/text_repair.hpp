#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "laga/act/config.hpp"
#include "laga/core/graph.hpp"
#include "laga/detail/text.hpp"
#include "laga/learn/augment.hpp"

namespace laga::act {

enum class TextTask { denoise, complete };

inline const char* to_string(TextTask t) {
    return t == TextTask::denoise ? "denoise" : "complete";
}

// Returns the repaired text, or nullopt to signal failure (the node then
// falls back to the local heuristic).
using TextProvider = std::function<std::optional<std::string>(
    TextTask task, int node, const std::string& text, const std::string& context)>;

struct TextEdit {
    int node = 0;
    TextTask task = TextTask::denoise;
    std::string before, after;
    bool fallback = true;
};

struct TextRepairResult {
    std::vector<std::string> texts;  // full text column after repair
    std::vector<TextEdit> edits;     // one entry per target, including no-ops
};

namespace impl {

// Neighbors ranked by predicted edge probability (descending), node id as
// the tie break; without a probability oracle the node id order is used.
inline std::vector<int> ranked_neighbors(const TextAttributedGraph& g, int node,
                                         const EdgeProbFn& edge_prob) {
    std::vector<int> nbrs = g.neighbors(node);
    if (edge_prob) {
        std::vector<std::pair<double, int>> scored;
        scored.reserve(nbrs.size());
        for (int j : nbrs) scored.emplace_back(-edge_prob(node, j), j);
        std::sort(scored.begin(), scored.end());
        for (std::size_t k = 0; k < nbrs.size(); ++k) nbrs[k] = scored[k].second;
    }
    return nbrs;
}

inline std::string neighbor_context(const TextAttributedGraph& g, int node,
                                    const learn::Augmentation& aug,
                                    const EdgeProbFn& edge_prob) {
    std::string con;
    int used = 0;
    for (int j : ranked_neighbors(g, node, edge_prob)) {
        if (used == 3) break;
        const std::string& s = aug.summaries[j];
        if (s.empty()) continue;
        if (!con.empty()) con += ' ';
        con += s;
        ++used;
    }
    return con;
}

inline std::string drop_unknown_tokens(const std::string& text,
                                       const detail::CorpusStats& corpus) {
    std::string out;
    for (const auto& raw : detail::split_tokens(text)) {
        if (detail::is_garbage_token(raw)) continue;
        const std::string norm = detail::normalize_token(raw);
        if (norm.empty() || !corpus.in_vocabulary(norm)) continue;
        if (!out.empty()) out += ' ';
        out += raw;
    }
    return out;
}

inline std::string append_missing_keywords(const std::string& text, int node,
                                           const TextAttributedGraph& g,
                                           const learn::Augmentation& aug,
                                           const EdgeProbFn& edge_prob) {
    std::set<std::string> present;
    for (const auto& tok : detail::normalized_tokens(text)) present.insert(tok);

    std::vector<int> sources = ranked_neighbors(g, node, edge_prob);
    if (sources.empty()) sources.push_back(node);  // isolated: use own keywords

    // The candidate list is the first five distinct keywords in source order,
    // independent of the current text. A repaired text already contains every
    // candidate, so a second pass appends nothing.
    std::vector<std::string> candidates;
    std::set<std::string> seen;
    for (int src : sources) {
        for (const auto& kw : aug.keywords[src]) {
            if (candidates.size() == 5) break;
            if (seen.insert(kw).second) candidates.push_back(kw);
        }
        if (candidates.size() == 5) break;
    }

    std::string out = text;
    for (const auto& kw : candidates) {
        if (!present.insert(kw).second) continue;
        if (!out.empty()) out += ' ';
        out += kw;
    }
    return out;
}

}  // namespace impl

inline TextRepairResult repair_texts(const TextAttributedGraph& g, const std::vector<int>& targets,
                                     TextTask task, const TextProvider& provider,
                                     const learn::Augmentation& aug, const EdgeProbFn& edge_prob,
                                     const OptimizeConfig& cfg) {
    validate(cfg);
    if (static_cast<int>(aug.summaries.size()) < g.n())
        throw ActError("repair_texts: augmentation does not cover the graph");
    TextRepairResult out;
    out.texts.reserve(g.n());
    for (int v = 0; v < g.n(); ++v) out.texts.push_back(g.node(v).text);

    std::vector<std::string> all_texts = out.texts;
    const auto corpus = detail::build_corpus_stats(all_texts);

    std::vector<int> ordered = targets;
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
    for (int node : ordered) {
        if (node < 0 || node >= g.n()) throw ActError("repair_texts: target out of range");
        TextEdit edit;
        edit.node = node;
        edit.task = task;
        edit.before = out.texts[node];

        std::optional<std::string> provided;
        if (provider)
            provided = provider(task, node, edit.before,
                                impl::neighbor_context(g, node, aug, edge_prob));
        if (provided) {
            edit.after = *provided;
            edit.fallback = false;
        } else if (task == TextTask::denoise) {
            edit.after = impl::drop_unknown_tokens(edit.before, corpus);
        } else {
            edit.after = impl::append_missing_keywords(edit.before, node, g, aug, edge_prob);
        }
        out.texts[node] = edit.after;
        out.edits.push_back(std::move(edit));
    }
    return out;
}

}  // namespace laga::act
