#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "laga/act/config.hpp"
#include "laga/core/graph.hpp"
#include "laga/detail/rng.hpp"
#include "laga/detail/text.hpp"
#include "laga/learn/encoder.hpp"
#include "laga/learn/state.hpp"

namespace laga::act {

// Produces text for a synthetic node of the given class; nullopt falls back
// to the class keyword digest.
using GenerationProvider =
    std::function<std::optional<std::string>(int class_id, const std::string& context)>;

struct GeneratedNode {
    int id = 0;
    int label = 0;
    std::string text;
    bool fallback = true;
    std::vector<std::pair<int, double>> edges;  // peer id, predicted probability
};

struct GenerateResult {
    double tau_gen = 0.0;
    std::vector<int> deficits;  // per class, zero when above threshold
    std::vector<GeneratedNode> nodes;
};

namespace impl {

// The threshold is computed over organic nodes only, so re-running the
// operator on its own output asks for nothing new.
inline double generation_threshold(const TextAttributedGraph& g, double r_gen) {
    std::vector<int> organic(g.num_classes(), 0);
    for (int v = 0; v < g.n(); ++v)
        if (!g.node(v).generated && g.visible_label(v)) organic[*g.visible_label(v)] += 1;
    double total = 0.0;
    for (int c : organic) total += c;
    return r_gen * total / g.num_classes();
}

inline std::vector<std::string> class_texts(const TextAttributedGraph& g, int cls) {
    std::vector<std::string> out;
    for (int v = 0; v < g.n(); ++v)
        if (g.visible_label(v) == cls && !detail::normalized_tokens(g.node(v).text).empty())
            out.push_back(g.node(v).text);
    return out;
}

}  // namespace impl

inline GenerateResult generate_nodes(const TextAttributedGraph& g,
                                     const learn::LearnedState& state,
                                     const GenerationProvider& provider,
                                     const OptimizeConfig& cfg) {
    validate(cfg);
    if (g.num_classes() < 2) throw ActError("generate_nodes: needs at least two classes");
    if (state.n != g.n()) throw ActError("generate_nodes: state does not match the graph");

    GenerateResult out;
    out.tau_gen = impl::generation_threshold(g, cfg.r_gen);
    const auto counts = g.visible_class_counts();
    out.deficits.assign(g.num_classes(), 0);
    for (int c = 0; c < g.num_classes(); ++c)
        if (counts[c] < out.tau_gen)
            out.deficits[c] = static_cast<int>(std::ceil(out.tau_gen - counts[c]));

    std::vector<std::string> texts;
    texts.reserve(g.n());
    for (int v = 0; v < g.n(); ++v) texts.push_back(g.node(v).text);
    const auto corpus = detail::build_corpus_stats(texts);

    int next_id = g.n();
    for (int c = 0; c < g.num_classes(); ++c) {
        if (out.deficits[c] == 0) continue;
        const auto pool = impl::class_texts(g, c);
        std::string keyword_digest;
        if (!pool.empty())
            keyword_digest = detail::join_tokens(
                detail::top_keywords(detail::join_tokens(pool), corpus, 10));
        if (keyword_digest.empty()) keyword_digest = "class " + std::to_string(c);

        auto rng = detail::RngStream(cfg.seed).derive("act.generate", c);
        for (int k = 0; k < out.deficits[c]; ++k) {
            GeneratedNode node;
            node.id = next_id++;
            node.label = c;

            std::string context;
            if (!pool.empty()) {
                const auto picks =
                    rng.sample_indices(pool.size(), std::min<std::size_t>(3, pool.size()));
                for (auto idx : picks) {
                    if (!context.empty()) context += ' ';
                    context += pool[idx];
                }
            }
            std::optional<std::string> provided;
            if (provider) provided = provider(c, context);
            if (provided) {
                node.text = *provided;
                node.fallback = false;
            } else {
                node.text = keyword_digest;
            }
            out.nodes.push_back(std::move(node));
        }
    }
    if (out.nodes.empty()) return out;

    std::vector<std::string> with_new = texts;
    for (const auto& node : out.nodes) with_new.push_back(node.text);
    const auto features = learn::encode_features(with_new, state.feature_dim);

    for (std::size_t k = 0; k < out.nodes.size(); ++k) {
        auto& node = out.nodes[k];
        const Eigen::VectorXd h =
            learn::embed_isolated(state, features.rows.row(g.n() + k).transpose());
        std::vector<std::pair<double, int>> scored;
        for (int u = 0; u < g.n(); ++u) {
            const double p =
                learn::edge_probability(state.structural, h, state.h_stu.row(u).transpose());
            if (p > cfg.tau_edge) scored.emplace_back(-p, u);
        }
        std::sort(scored.begin(), scored.end());
        if (static_cast<int>(scored.size()) > cfg.k_edge) scored.resize(cfg.k_edge);
        for (const auto& [neg_p, u] : scored) node.edges.emplace_back(u, -neg_p);
    }
    return out;
}

inline TextAttributedGraph apply_generated_nodes(const TextAttributedGraph& g,
                                                 const GenerateResult& result) {
    if (result.nodes.empty()) return g;
    auto nodes = g.copy_nodes();
    auto edges = g.copy_edges();
    for (const auto& gen : result.nodes) {
        NodeRecord rec;
        rec.id = gen.id;
        rec.text = gen.text;
        rec.label = gen.label;
        rec.split = Split::train;
        rec.generated = true;
        nodes.push_back(std::move(rec));
        for (const auto& [u, p] : gen.edges) edges.emplace_back(u, gen.id);
    }
    return TextAttributedGraph::create(std::move(nodes), std::move(edges), g.num_classes(),
                                       g.metadata());
}

}  // namespace laga::act
