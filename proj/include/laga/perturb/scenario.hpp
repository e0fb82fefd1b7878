#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "laga/core/graph.hpp"
#include "laga/detail/rng.hpp"
#include "laga/detail/text.hpp"

namespace laga::perturb {

enum class ScenarioKind { TS, TN, TI, SS, SN, SI, LS, LN, LI };

inline const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::TS: return "TS";
        case ScenarioKind::TN: return "TN";
        case ScenarioKind::TI: return "TI";
        case ScenarioKind::SS: return "SS";
        case ScenarioKind::SN: return "SN";
        case ScenarioKind::SI: return "SI";
        case ScenarioKind::LS: return "LS";
        case ScenarioKind::LN: return "LN";
        case ScenarioKind::LI: return "LI";
    }
    throw GraphError("invalid scenario kind");
}

inline ScenarioKind scenario_from_string(const std::string& s) {
    static const std::pair<const char*, ScenarioKind> table[] = {
        {"TS", ScenarioKind::TS}, {"TN", ScenarioKind::TN}, {"TI", ScenarioKind::TI},
        {"SS", ScenarioKind::SS}, {"SN", ScenarioKind::SN}, {"SI", ScenarioKind::SI},
        {"LS", ScenarioKind::LS}, {"LN", ScenarioKind::LN}, {"LI", ScenarioKind::LI}};
    for (const auto& [name, kind] : table)
        if (s == name) return kind;
    throw GraphError("unknown scenario kind '" + s + "'");
}

inline std::vector<ScenarioKind> all_scenarios() {
    return {ScenarioKind::TS, ScenarioKind::TN, ScenarioKind::TI,
            ScenarioKind::SS, ScenarioKind::SN, ScenarioKind::SI,
            ScenarioKind::LS, ScenarioKind::LN, ScenarioKind::LI};
}

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::TS;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

struct TextChange {
    int node = 0;
    std::string before, after;
    bool operator==(const TextChange&) const = default;
};
struct SplitChange {
    int node = 0;
    Split before = Split::train, after = Split::train;
    bool operator==(const SplitChange&) const = default;
};
struct LabelChange {
    int node = 0;
    std::optional<int> before, after;
    bool operator==(const LabelChange&) const = default;
};

// Complete record of one scenario application; apply_inverse() restores the
// original graph exactly.
struct PerturbationLog {
    ScenarioKind kind = ScenarioKind::TS;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::size_t population = 0;
    std::vector<int> selected_nodes;
    std::vector<TextChange> text_changes;
    std::vector<std::pair<int, int>> removed_edges;
    std::vector<std::pair<int, int>> added_edges;
    std::vector<SplitChange> split_changes;
    std::vector<LabelChange> label_changes;

    bool operator==(const PerturbationLog&) const = default;

    std::size_t affected_count() const {
        switch (kind) {
            case ScenarioKind::TS:
            case ScenarioKind::TN:
            case ScenarioKind::TI:
            case ScenarioKind::SI: return selected_nodes.size();
            case ScenarioKind::SS: return removed_edges.size();
            case ScenarioKind::SN: return added_edges.size();
            case ScenarioKind::LS: return split_changes.size();
            case ScenarioKind::LN:
            case ScenarioKind::LI: return label_changes.size();
        }
        return 0;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["kind"] = to_string(kind);
        j["ratio"] = ratio;
        j["seed"] = seed;
        j["population"] = population;
        j["selected_nodes"] = selected_nodes;
        j["text_changes"] = nlohmann::ordered_json::array();
        for (const auto& c : text_changes)
            j["text_changes"].push_back({{"node", c.node}, {"before", c.before}, {"after", c.after}});
        j["removed_edges"] = removed_edges;
        j["added_edges"] = added_edges;
        j["split_changes"] = nlohmann::ordered_json::array();
        for (const auto& c : split_changes)
            j["split_changes"].push_back(
                {{"node", c.node}, {"before", laga::to_string(c.before)}, {"after", laga::to_string(c.after)}});
        j["label_changes"] = nlohmann::ordered_json::array();
        for (const auto& c : label_changes) {
            nlohmann::ordered_json e;
            e["node"] = c.node;
            e["before"] = c.before ? nlohmann::ordered_json(*c.before) : nullptr;
            e["after"] = c.after ? nlohmann::ordered_json(*c.after) : nullptr;
            j["label_changes"].push_back(e);
        }
        return j;
    }

    static PerturbationLog from_json(const nlohmann::json& j) {
        PerturbationLog log;
        log.kind = scenario_from_string(j.at("kind").get<std::string>());
        log.ratio = j.at("ratio").get<double>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.population = j.at("population").get<std::size_t>();
        log.selected_nodes = j.at("selected_nodes").get<std::vector<int>>();
        for (const auto& e : j.at("text_changes"))
            log.text_changes.push_back({e.at("node").get<int>(),
                                        e.at("before").get<std::string>(),
                                        e.at("after").get<std::string>()});
        for (const auto& e : j.at("removed_edges"))
            log.removed_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        for (const auto& e : j.at("added_edges"))
            log.added_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        for (const auto& e : j.at("split_changes"))
            log.split_changes.push_back({e.at("node").get<int>(),
                                         split_from_string(e.at("before").get<std::string>()),
                                         split_from_string(e.at("after").get<std::string>())});
        for (const auto& e : j.at("label_changes")) {
            LabelChange c;
            c.node = e.at("node").get<int>();
            if (!e.at("before").is_null()) c.before = e.at("before").get<int>();
            if (!e.at("after").is_null()) c.after = e.at("after").get<int>();
            log.label_changes.push_back(c);
        }
        return log;
    }
};

struct PerturbationResult {
    TextAttributedGraph graph;
    PerturbationLog log;
};

namespace impl {

inline std::size_t scaled_count(double ratio, std::size_t population) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(population)));
}

inline std::vector<int> pick_nodes(detail::RngStream& rng, std::size_t population, std::size_t k) {
    auto idx = rng.sample_indices(population, k);
    std::vector<int> out(idx.begin(), idx.end());
    std::sort(out.begin(), out.end());
    return out;
}

inline const std::vector<std::string>& garbage_lexicon() {
    static const std::vector<std::string> lex = {"x7#q", "zq@2", "bl%k", "##rr",
                                                 "q!!v", "0_xx", "jj~3", "wz^y"};
    return lex;
}

// Alternates character transposition of an existing token with garbage-token
// injection; k corruption events total.
inline std::string corrupt_text(const std::string& text, std::size_t k, detail::RngStream& rng) {
    auto tokens = detail::split_tokens(text);
    for (std::size_t event = 0; event < k; ++event) {
        const bool transpose = (event % 2 == 0) && !tokens.empty();
        if (transpose) {
            std::string& tok = tokens[rng.below(tokens.size())];
            if (tok.size() >= 2) {
                const std::size_t p = rng.below(tok.size() - 1);
                std::swap(tok[p], tok[p + 1]);
                continue;
            }
        }
        const auto& lex = garbage_lexicon();
        const std::string& junk = lex[rng.below(lex.size())];
        const std::size_t pos = rng.below(tokens.size() + 1);
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), junk);
    }
    return detail::join_tokens(tokens);
}

}  // namespace impl

inline PerturbationResult apply_scenario(const TextAttributedGraph& g, const ScenarioSpec& spec) {
    if (!(spec.ratio >= 0.0 && spec.ratio <= 1.0))
        throw GraphError("scenario ratio must lie in [0, 1]");
    detail::RngStream rng =
        detail::RngStream(spec.seed).derive("perturb").derive(to_string(spec.kind));

    PerturbationLog log;
    log.kind = spec.kind;
    log.ratio = spec.ratio;
    log.seed = spec.seed;

    auto nodes = g.copy_nodes();
    auto edges = g.copy_edges();

    switch (spec.kind) {
        case ScenarioKind::TS:
        case ScenarioKind::TN:
        case ScenarioKind::TI: {
            log.population = static_cast<std::size_t>(g.n());
            const auto selected =
                impl::pick_nodes(rng, log.population, impl::scaled_count(spec.ratio, log.population));
            log.selected_nodes = selected;
            for (int v : selected) {
                const std::string before = nodes[v].text;
                std::string after;
                if (spec.kind == ScenarioKind::TS) {
                    after = "";
                } else if (spec.kind == ScenarioKind::TI) {
                    auto toks = detail::split_tokens(before);
                    if (toks.size() > 5) toks.resize(5);
                    after = detail::join_tokens(toks);
                } else {
                    const std::size_t token_count = detail::split_tokens(before).size();
                    const auto k = static_cast<std::size_t>(
                        std::llround(0.4 * static_cast<double>(token_count)));
                    after = impl::corrupt_text(before, k, rng);
                }
                nodes[v].text = after;
                log.text_changes.push_back({v, before, after});
            }
            break;
        }
        case ScenarioKind::SS: {
            log.population = static_cast<std::size_t>(g.m());
            const auto idx = rng.sample_indices(log.population,
                                                impl::scaled_count(spec.ratio, log.population));
            std::vector<std::pair<int, int>> removed;
            for (std::size_t i : idx) removed.push_back(edges[i]);
            std::sort(removed.begin(), removed.end());
            log.removed_edges = removed;
            std::vector<std::pair<int, int>> kept;
            std::set<std::pair<int, int>> drop(removed.begin(), removed.end());
            for (const auto& e : edges)
                if (!drop.count(e)) kept.push_back(e);
            edges = std::move(kept);
            break;
        }
        case ScenarioKind::SN: {
            log.population = static_cast<std::size_t>(g.m());
            const std::size_t want = impl::scaled_count(spec.ratio, log.population);
            std::set<std::pair<int, int>> present(edges.begin(), edges.end());
            std::set<std::pair<int, int>> added;
            auto labels_differ = [&](int u, int v) {
                const auto& a = g.node(u).label;
                const auto& b = g.node(v).label;
                return a && b && *a != *b;
            };
            const std::size_t attempt_budget = 400 * (want + 1);
            std::size_t attempts = 0;
            const auto n = static_cast<std::size_t>(g.n());
            while (added.size() < want && attempts < attempt_budget) {
                ++attempts;
                int u = static_cast<int>(rng.below(n));
                int v = static_cast<int>(rng.below(n));
                if (u == v) continue;
                if (u > v) std::swap(u, v);
                const std::pair<int, int> e{u, v};
                if (present.count(e) || added.count(e)) continue;
                if (!labels_differ(u, v)) continue;
                added.insert(e);
            }
            if (added.size() < want) {
                // Label-aware pairs exhausted; fall back to arbitrary
                // non-adjacent pairs, enumerated deterministically.
                std::vector<std::pair<int, int>> pool;
                for (int u = 0; u + 1 < g.n(); ++u)
                    for (int v = u + 1; v < g.n(); ++v) {
                        const std::pair<int, int> e{u, v};
                        if (!present.count(e) && !added.count(e)) pool.push_back(e);
                    }
                if (pool.size() + added.size() < want)
                    throw GraphError("structure-noise scenario: not enough non-adjacent pairs");
                for (std::size_t i : rng.sample_indices(pool.size(), want - added.size()))
                    added.insert(pool[i]);
            }
            log.added_edges.assign(added.begin(), added.end());
            for (const auto& e : added) edges.push_back(e);
            break;
        }
        case ScenarioKind::SI: {
            log.population = static_cast<std::size_t>(g.n());
            const std::size_t want = impl::scaled_count(spec.ratio, log.population);
            std::vector<int> order(g.n());
            for (int i = 0; i < g.n(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return g.degree(a) < g.degree(b); });
            order.resize(want);
            std::sort(order.begin(), order.end());
            log.selected_nodes = order;
            std::set<std::pair<int, int>> present(edges.begin(), edges.end());
            for (int v : order) {
                std::vector<std::pair<int, int>> incident;
                for (int u : g.neighbors(v)) {
                    const std::pair<int, int> e{std::min(u, v), std::max(u, v)};
                    if (present.count(e)) incident.push_back(e);
                }
                if (incident.size() <= 1) continue;
                const std::size_t keep = rng.below(incident.size());
                for (std::size_t i = 0; i < incident.size(); ++i) {
                    if (i == keep) continue;
                    present.erase(incident[i]);
                    log.removed_edges.push_back(incident[i]);
                }
            }
            std::sort(log.removed_edges.begin(), log.removed_edges.end());
            edges.assign(present.begin(), present.end());
            break;
        }
        case ScenarioKind::LS: {
            std::vector<int> eligible = g.split_nodes(Split::train);
            log.population = eligible.size();
            const auto idx = rng.sample_indices(log.population,
                                                impl::scaled_count(spec.ratio, log.population));
            std::vector<int> chosen;
            for (std::size_t i : idx) chosen.push_back(eligible[i]);
            std::sort(chosen.begin(), chosen.end());
            for (int v : chosen) {
                log.split_changes.push_back({v, nodes[v].split, Split::unlabeled});
                nodes[v].split = Split::unlabeled;
            }
            break;
        }
        case ScenarioKind::LN: {
            if (g.num_classes() < 2)
                throw GraphError("label-noise scenario requires at least 2 classes");
            std::vector<int> eligible = g.visible_labeled_nodes();
            log.population = eligible.size();
            const auto idx = rng.sample_indices(log.population,
                                                impl::scaled_count(spec.ratio, log.population));
            std::vector<int> chosen;
            for (std::size_t i : idx) chosen.push_back(eligible[i]);
            std::sort(chosen.begin(), chosen.end());
            for (int v : chosen) {
                const int old = *nodes[v].label;
                const auto draw = static_cast<int>(rng.below(g.num_classes() - 1));
                const int fresh = draw >= old ? draw + 1 : draw;
                log.label_changes.push_back({v, old, fresh});
                nodes[v].label = fresh;
            }
            break;
        }
        case ScenarioKind::LI: {
            const auto counts = g.visible_class_counts();
            int largest = 0;
            for (int c = 1; c < g.num_classes(); ++c)
                if (counts[c] > counts[largest]) largest = c;
            log.population = 0;
            for (int c = 0; c < g.num_classes(); ++c) {
                if (c == largest) continue;
                std::vector<int> eligible;
                for (int v : g.visible_labeled_nodes())
                    if (*g.node(v).label == c) eligible.push_back(v);
                log.population += eligible.size();
                const auto idx =
                    rng.sample_indices(eligible.size(), impl::scaled_count(spec.ratio, eligible.size()));
                std::vector<int> chosen;
                for (std::size_t i : idx) chosen.push_back(eligible[i]);
                std::sort(chosen.begin(), chosen.end());
                for (int v : chosen) {
                    log.label_changes.push_back({v, nodes[v].label, std::nullopt});
                    nodes[v].label = std::nullopt;
                }
            }
            break;
        }
    }

    PerturbationResult out;
    out.graph = TextAttributedGraph::create(std::move(nodes), std::move(edges), g.num_classes(),
                                            g.metadata());
    out.log = std::move(log);
    return out;
}

// Exact inversion of apply_scenario. Throws when the log does not match the
// perturbed graph.
inline TextAttributedGraph apply_inverse(const TextAttributedGraph& g, const PerturbationLog& log) {
    auto nodes = g.copy_nodes();
    auto edges = g.copy_edges();
    for (const auto& c : log.text_changes) {
        if (nodes.at(c.node).text != c.after)
            throw GraphError("inverse: text of node " + std::to_string(c.node) +
                             " does not match log");
        nodes[c.node].text = c.before;
    }
    for (const auto& c : log.split_changes) {
        if (nodes.at(c.node).split != c.after)
            throw GraphError("inverse: split of node " + std::to_string(c.node) +
                             " does not match log");
        nodes[c.node].split = c.before;
    }
    for (const auto& c : log.label_changes) {
        if (nodes.at(c.node).label != c.after)
            throw GraphError("inverse: label of node " + std::to_string(c.node) +
                             " does not match log");
        nodes[c.node].label = c.before;
    }
    std::set<std::pair<int, int>> present(edges.begin(), edges.end());
    for (const auto& e : log.added_edges) {
        if (!present.erase(e))
            throw GraphError("inverse: logged added edge (" + std::to_string(e.first) + ", " +
                             std::to_string(e.second) + ") absent from graph");
    }
    for (const auto& e : log.removed_edges) {
        if (!present.insert(e).second)
            throw GraphError("inverse: logged removed edge (" + std::to_string(e.first) + ", " +
                             std::to_string(e.second) + ") already present");
    }
    edges.assign(present.begin(), present.end());
    return TextAttributedGraph::create(std::move(nodes), std::move(edges), g.num_classes(),
                                       g.metadata());
}

}  // namespace laga::perturb
