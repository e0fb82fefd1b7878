#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "laga/act/config.hpp"
#include "laga/act/generate.hpp"
#include "laga/act/label_opt.hpp"
#include "laga/act/structure_opt.hpp"
#include "laga/act/text_repair.hpp"
#include "laga/detect/report.hpp"
#include "laga/learn/augment.hpp"
#include "laga/learn/state.hpp"
#include "laga/plan/report.hpp"

namespace laga::act {

struct ActProviders {
    TextProvider text;            // denoise and completion rewrites
    GenerationProvider generate;  // synthetic node texts
};

// Link-probability oracle that stays usable after generation enlarges the
// graph: rows are appended for synthetic nodes as they appear.
struct EdgeScorer {
    Eigen::MatrixXd h;
    const learn::StructuralParams* params = nullptr;

    double operator()(int i, int j) const {
        if (i == j) throw ActError("edge scorer: self-pair not allowed");
        if (i < 0 || j < 0 || i >= h.rows() || j >= h.rows())
            throw ActError("edge scorer: node out of range");
        return learn::edge_probability(*params, h.row(i).transpose(), h.row(j).transpose());
    }
};

struct ApplyResult {
    TextAttributedGraph graph;
    nlohmann::ordered_json log;
    bool aborted = false;
    std::string error;
};

namespace impl {

// Pruning must see the edge set before completion tops degrees up, so a
// chosen add action never runs ahead of a chosen prune. Only the structure
// actions trade places; every other action keeps its slot.
inline std::vector<std::size_t> dispatch_order(const std::vector<std::size_t>& chosen,
                                               const std::vector<plan::ActionCandidate>& cands) {
    std::vector<std::size_t> order = chosen;
    std::vector<std::size_t> slots, structural;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const plan::ActionKind kind = cands[order[k]].kind;
        if (kind == plan::ActionKind::prune_edges || kind == plan::ActionKind::add_edges) {
            slots.push_back(k);
            structural.push_back(order[k]);
        }
    }
    std::stable_sort(structural.begin(), structural.end(), [&](std::size_t a, std::size_t b) {
        return cands[a].kind == plan::ActionKind::prune_edges &&
               cands[b].kind == plan::ActionKind::add_edges;
    });
    for (std::size_t k = 0; k < slots.size(); ++k) order[slots[k]] = structural[k];
    return order;
}

// Synthetic nodes need summaries and keywords so they can serve as context
// for later text repairs; the fallback recipe from the augmentation stage is
// reused verbatim.
inline void extend_augmentation(learn::Augmentation& aug, const TextAttributedGraph& g) {
    const int have = static_cast<int>(aug.summaries.size());
    if (have >= g.n()) return;
    std::vector<std::string> texts;
    texts.reserve(g.n());
    for (int v = 0; v < g.n(); ++v) texts.push_back(g.node(v).text);
    const auto corpus = detail::build_corpus_stats(texts);
    for (int v = have; v < g.n(); ++v) {
        const std::string& text = texts[v];
        std::string summary;
        std::vector<std::string> keywords;
        if (!detail::normalized_tokens(text).empty()) {
            summary = detail::leading_sentences(text, 2);
            keywords = detail::top_keywords(text, corpus, 5);
        }
        std::string enriched = text;
        if (!summary.empty()) enriched += ' ' + summary;
        if (!keywords.empty()) enriched += ' ' + detail::join_tokens(keywords);
        aug.summaries.push_back(std::move(summary));
        aug.keywords.push_back(std::move(keywords));
        aug.enriched.push_back(std::move(enriched));
        aug.from_fallback.push_back(true);
    }
}

inline nlohmann::ordered_json text_edits_json(const std::vector<TextEdit>& edits) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : edits) {
        nlohmann::ordered_json j;
        j["node"] = e.node;
        j["before"] = e.before;
        j["after"] = e.after;
        j["fallback"] = e.fallback;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline nlohmann::ordered_json label_edits_json(const std::vector<LabelEdit>& edits) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : edits) {
        nlohmann::ordered_json j;
        j["node"] = e.node;
        if (e.before)
            j["before"] = *e.before;
        else
            j["before"] = nullptr;
        if (e.after)
            j["after"] = *e.after;
        else
            j["after"] = nullptr;
        j["path"] = to_string(e.path);
        j["confidence"] = e.confidence;
        j["split_promoted"] = e.split_promoted;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace impl

// Runs the selected actions in plan order against a working copy of the
// graph. Any action that throws aborts the program: the graph as of the last
// completed action is returned together with the partial log.
inline ApplyResult apply_program(const TextAttributedGraph& g, const plan::PlanReport& plan,
                                 const learn::LearnedState& state,
                                 const learn::Augmentation& aug,
                                 const detect::DetectionReport& report,
                                 const ActProviders& providers, const OptimizeConfig& cfg) {
    validate(cfg);
    if (state.n != g.n()) throw ActError("apply_program: state does not match the graph");

    ApplyResult out{g, nlohmann::ordered_json(), false, ""};
    out.log["schema"] = "changes/1";
    out.log["actions"] = nlohmann::ordered_json::array();

    EdgeScorer scorer{state.h_stu, &state.structural};
    const EdgeProbFn edge_prob = [&scorer](int i, int j) { return scorer(i, j); };
    learn::Augmentation aug_work = aug;

    int texts_changed = 0, edges_removed = 0, edges_added = 0, labels_assigned = 0,
        nodes_generated = 0;

    for (std::size_t idx : impl::dispatch_order(plan.selection.chosen, plan.candidates)) {
        const plan::ActionCandidate& cand = plan.candidates[idx];
        nlohmann::ordered_json entry;
        entry["action"] = plan::to_string(cand.kind);
        entry["issue"] = to_string(cand.issue);
        try {
            switch (cand.kind) {
                case plan::ActionKind::denoise_texts:
                case plan::ActionKind::complete_texts: {
                    const TextTask task = cand.kind == plan::ActionKind::denoise_texts
                                              ? TextTask::denoise
                                              : TextTask::complete;
                    const auto result = repair_texts(out.graph, cand.targets, task,
                                                     providers.text, aug_work, edge_prob, cfg);
                    auto nodes = out.graph.copy_nodes();
                    for (int v = 0; v < out.graph.n(); ++v) nodes[v].text = result.texts[v];
                    out.graph = out.graph.with_nodes(std::move(nodes));
                    for (const auto& e : result.edits)
                        if (e.after != e.before) ++texts_changed;
                    entry["edits"] = impl::text_edits_json(result.edits);
                    break;
                }
                case plan::ActionKind::prune_edges:
                case plan::ActionKind::add_edges: {
                    std::vector<std::vector<int>> flagged;
                    if (cand.kind == plan::ActionKind::prune_edges) {
                        for (int c : cand.targets) {
                            if (c < 0 || c >= static_cast<int>(report.communities.size()))
                                throw ActError("apply_program: community index out of range");
                            flagged.push_back(report.communities[c].members);
                        }
                    } else {
                        std::set<int> comms;
                        for (int v : cand.targets) {
                            if (v < 0 || v >= static_cast<int>(report.community_of.size()))
                                continue;  // synthetic nodes carry no community
                            const int c = report.community_of[v];
                            if (c >= 0) comms.insert(c);
                        }
                        for (int c : comms) flagged.push_back(report.communities[c].members);
                    }
                    const bool prune = cand.kind == plan::ActionKind::prune_edges;
                    const auto result =
                        optimize_structure(out.graph, flagged, edge_prob, cfg, prune, !prune);
                    out.graph = out.graph.with_edges(result.edges);
                    edges_removed += static_cast<int>(result.removed.size());
                    edges_added += static_cast<int>(result.added.size());
                    nlohmann::ordered_json removed = nlohmann::ordered_json::array();
                    for (const auto& r : result.removed)
                        removed.push_back(
                            {{"u", r.u}, {"v", r.v}, {"probability", r.probability}});
                    nlohmann::ordered_json added = nlohmann::ordered_json::array();
                    for (const auto& a : result.added)
                        added.push_back({{"node", a.node},
                                         {"peer", a.peer},
                                         {"probability", a.probability},
                                         {"degree_before", a.degree_before}});
                    entry["removed"] = std::move(removed);
                    entry["added"] = std::move(added);
                    break;
                }
                case plan::ActionKind::impute_labels:
                case plan::ActionKind::correct_labels: {
                    const auto result =
                        optimize_labels(out.graph, cand.targets, state, edge_prob, cfg);
                    out.graph = apply_label_edits(out.graph, result);
                    labels_assigned += result.assigned;
                    entry["edits"] = impl::label_edits_json(result.edits);
                    break;
                }
                case plan::ActionKind::generate_minority_nodes: {
                    const auto result =
                        generate_nodes(out.graph, state, providers.generate, cfg);
                    out.graph = apply_generated_nodes(out.graph, result);
                    nodes_generated += static_cast<int>(result.nodes.size());
                    if (!result.nodes.empty()) {
                        scorer.h.conservativeResize(out.graph.n(), scorer.h.cols());
                        std::vector<std::string> texts;
                        texts.reserve(out.graph.n());
                        for (int v = 0; v < out.graph.n(); ++v)
                            texts.push_back(out.graph.node(v).text);
                        const auto feats = learn::encode_features(texts, state.feature_dim);
                        for (const auto& node : result.nodes)
                            scorer.h.row(node.id) =
                                learn::embed_isolated(state, feats.rows.row(node.id).transpose())
                                    .transpose();
                        impl::extend_augmentation(aug_work, out.graph);
                    }
                    entry["tau_gen"] = result.tau_gen;
                    entry["deficits"] = result.deficits;
                    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
                    for (const auto& n : result.nodes) {
                        nlohmann::ordered_json j;
                        j["id"] = n.id;
                        j["label"] = n.label;
                        j["text"] = n.text;
                        j["fallback"] = n.fallback;
                        nlohmann::ordered_json es = nlohmann::ordered_json::array();
                        for (const auto& [peer, p] : n.edges)
                            es.push_back({{"peer", peer}, {"probability", p}});
                        j["edges"] = std::move(es);
                        nodes.push_back(std::move(j));
                    }
                    entry["nodes"] = std::move(nodes);
                    break;
                }
            }
            entry["status"] = "applied";
            out.log["actions"].push_back(std::move(entry));
        } catch (const std::exception& ex) {
            entry["status"] = "failed";
            entry["error"] = ex.what();
            out.log["actions"].push_back(std::move(entry));
            out.aborted = true;
            out.error = ex.what();
            break;
        }
    }

    out.log["summary"] = {{"texts_changed", texts_changed},
                          {"edges_removed", edges_removed},
                          {"edges_added", edges_added},
                          {"labels_assigned", labels_assigned},
                          {"nodes_generated", nodes_generated},
                          {"aborted", out.aborted}};
    return out;
}

}  // namespace laga::act
