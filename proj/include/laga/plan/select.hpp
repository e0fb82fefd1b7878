#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "laga/core/issue.hpp"
#include "laga/detect/report.hpp"
#include "laga/plan/severity.hpp"
#include "laga/plan/weights.hpp"

namespace laga::plan {

enum class ActionKind {
    denoise_texts,
    complete_texts,
    prune_edges,
    add_edges,
    impute_labels,
    correct_labels,
    generate_minority_nodes,
};

inline const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::denoise_texts: return "denoise_texts";
        case ActionKind::complete_texts: return "complete_texts";
        case ActionKind::prune_edges: return "prune_edges";
        case ActionKind::add_edges: return "add_edges";
        case ActionKind::impute_labels: return "impute_labels";
        case ActionKind::correct_labels: return "correct_labels";
        case ActionKind::generate_minority_nodes: return "generate_minority_nodes";
    }
    throw std::invalid_argument("invalid action kind");
}

inline ActionKind action_from_string(const std::string& s) {
    static const ActionKind kinds[] = {
        ActionKind::denoise_texts, ActionKind::complete_texts,  ActionKind::prune_edges,
        ActionKind::add_edges,     ActionKind::impute_labels,   ActionKind::correct_labels,
        ActionKind::generate_minority_nodes};
    for (ActionKind k : kinds)
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown action kind '" + s + "'");
}

enum class TargetKind { nodes, communities, classes };

inline const char* to_string(TargetKind k) {
    switch (k) {
        case TargetKind::nodes: return "nodes";
        case TargetKind::communities: return "communities";
        case TargetKind::classes: return "classes";
    }
    throw std::invalid_argument("invalid target kind");
}

inline TargetKind target_kind_from_string(const std::string& s) {
    if (s == "nodes") return TargetKind::nodes;
    if (s == "communities") return TargetKind::communities;
    if (s == "classes") return TargetKind::classes;
    throw std::invalid_argument("unknown target kind '" + s + "'");
}

struct ActionCandidate {
    ActionKind kind = ActionKind::denoise_texts;
    QualityIssue issue = QualityIssue::TN;
    TargetKind target_kind = TargetKind::nodes;
    std::vector<int> targets;
    double utility = 0.0;  // severity-weighted benefit estimate
    double cost = 0.0;     // item-level operation estimate
};

struct PlanSelection {
    std::vector<std::size_t> chosen;  // indices into the candidate list, priority order
    double utility = 0.0;
    double cost = 0.0;
    double objective = 0.0;
    bool exact = false;
};

namespace impl {

inline int priority_rank(const std::array<QualityIssue, 9>& priority, QualityIssue issue) {
    for (int r = 0; r < 9; ++r)
        if (priority[r] == issue) return r;
    return 9;
}

inline void sort_by_priority(std::vector<std::size_t>& chosen,
                             const std::vector<ActionCandidate>& candidates,
                             const std::array<QualityIssue, 9>& priority) {
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        const int ra = priority_rank(priority, candidates[a].issue);
        const int rb = priority_rank(priority, candidates[b].issue);
        if (ra != rb) return ra < rb;
        return a < b;
    });
}

}  // namespace impl

inline constexpr std::size_t kExactSelectionLimit = 12;

// Budgeted subset selection maximizing sum(U) - lambda * sum(CT) subject to
// sum(CT) <= B. Exhaustive for small candidate sets, cost-effectiveness
// greedy beyond that. The emitted order follows the issue priority.
inline PlanSelection select_actions(const std::vector<ActionCandidate>& candidates, double budget,
                                    double lambda,
                                    const std::array<QualityIssue, 9>& priority) {
    PlanSelection best;
    const std::size_t n = candidates.size();
    if (n <= kExactSelectionLimit) {
        best.exact = true;
        double best_obj = 0.0;  // empty plan baseline
        double best_cost = 0.0;
        std::uint32_t best_mask = 0;
        bool found = true;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double u = 0.0, ct = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) {
                    u += candidates[i].utility;
                    ct += candidates[i].cost;
                }
            if (ct > budget) continue;
            const double obj = u - lambda * ct;
            const bool better =
                obj > best_obj + 1e-12 ||
                (std::abs(obj - best_obj) <= 1e-12 &&
                 (ct < best_cost - 1e-12 ||
                  (std::abs(ct - best_cost) <= 1e-12 && mask < best_mask)));
            if (!found || better) {
                found = true;
                best_obj = obj;
                best_cost = ct;
                best_mask = mask;
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (best_mask & (1u << i)) best.chosen.push_back(i);
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ea = candidates[a].cost > 0
                                  ? candidates[a].utility / candidates[a].cost
                                  : std::numeric_limits<double>::infinity();
            const double eb = candidates[b].cost > 0
                                  ? candidates[b].utility / candidates[b].cost
                                  : std::numeric_limits<double>::infinity();
            if (ea != eb) return ea > eb;
            return a < b;
        });
        double spent = 0.0;
        for (std::size_t i : order) {
            if (spent + candidates[i].cost > budget) continue;
            const double gain = candidates[i].utility - lambda * candidates[i].cost;
            if (gain <= 0.0) continue;
            best.chosen.push_back(i);
            spent += candidates[i].cost;
        }
    }
    impl::sort_by_priority(best.chosen, candidates, priority);
    for (std::size_t i : best.chosen) {
        best.utility += candidates[i].utility;
        best.cost += candidates[i].cost;
    }
    best.objective = best.utility - lambda * best.cost;
    return best;
}

struct PlanConfig {
    SeverityRules rules;
    std::array<double, 9> relevance = {1, 1, 1, 1, 1, 1, 1, 1, 1};
    double eta = 1.0;
    double budget = 1000.0;
    double lambda = 0.01;
    int completion_degree = 10;   // k_edge, used for low-degree target extraction
    double generation_rate = 0.3; // r_gen, deficit gate for minority classes
};

// Derives the candidate list from a detection report. A candidate exists only
// when its issue has nonzero severity and a nonempty target set.
inline std::vector<ActionCandidate> candidates_from_report(const detect::DetectionReport& r,
                                                           const SeverityAssessment& assessment,
                                                           const PlanConfig& cfg) {
    std::vector<ActionCandidate> out;
    auto severity = [&](QualityIssue i) { return assessment.severities[issue_index(i)]; };

    auto push = [&](ActionKind kind, QualityIssue issue, TargetKind tk, std::vector<int> targets,
                    double cost) {
        if (severity(issue) == 0 || targets.empty()) return;
        ActionCandidate c;
        c.kind = kind;
        c.issue = issue;
        c.target_kind = tk;
        c.targets = std::move(targets);
        c.utility = static_cast<double>(severity(issue)) * static_cast<double>(c.targets.size());
        c.cost = cost;
        out.push_back(std::move(c));
    };

    push(ActionKind::denoise_texts, QualityIssue::TN, TargetKind::nodes, r.noisy_text_nodes,
         static_cast<double>(r.noisy_text_nodes.size()));

    {
        std::vector<int> targets = r.sparse_text_nodes;
        targets.insert(targets.end(), r.uninformative_text_nodes.begin(),
                       r.uninformative_text_nodes.end());
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        const QualityIssue issue =
            severity(QualityIssue::TS) >= severity(QualityIssue::TI) ? QualityIssue::TS
                                                                     : QualityIssue::TI;
        push(ActionKind::complete_texts, issue, TargetKind::nodes, targets,
             static_cast<double>(targets.size()));
    }

    push(ActionKind::prune_edges, QualityIssue::SN, TargetKind::communities, r.noisy_communities,
         static_cast<double>(std::max<std::size_t>(1, r.noisy_communities.size())));

    {
        // Low-degree nodes inside flagged communities; under global degree
        // imbalance the bottom tail joins regardless of community flags.
        std::vector<bool> community_flagged(r.communities.size(), false);
        for (int c : r.sparse_communities) community_flagged[c] = true;
        for (int c : r.noisy_communities) community_flagged[c] = true;
        std::vector<int> targets;
        for (int v = 0; v < r.num_nodes; ++v) {
            if (v < static_cast<int>(r.degrees.size()) && r.degrees[v] >= cfg.completion_degree)
                continue;
            const int c = v < static_cast<int>(r.community_of.size()) ? r.community_of[v] : -1;
            const bool flagged = c >= 0 && community_flagged[c];
            if (!flagged && !r.degree_imbalanced) continue;
            targets.push_back(v);
        }
        const int sev_ss = severity(QualityIssue::SS);
        const int sev_si = severity(QualityIssue::SI);
        const QualityIssue issue = sev_ss >= sev_si ? QualityIssue::SS : QualityIssue::SI;
        if (sev_ss > 0 || sev_si > 0) {
            ActionCandidate c;
            c.kind = ActionKind::add_edges;
            c.issue = issue;
            c.target_kind = TargetKind::nodes;
            c.targets = std::move(targets);
            if (!c.targets.empty()) {
                c.utility = static_cast<double>(std::max(sev_ss, sev_si)) *
                            static_cast<double>(c.targets.size());
                c.cost = static_cast<double>(std::max<std::size_t>(
                    1, r.sparse_communities.size() + r.noisy_communities.size()));
                out.push_back(std::move(c));
            }
        }
    }

    {
        std::vector<int> targets;
        for (const auto& f : r.missing_labels) targets.push_back(f.node);
        push(ActionKind::impute_labels, QualityIssue::LS, TargetKind::nodes, targets,
             static_cast<double>(targets.size()));
    }
    {
        std::vector<int> targets;
        for (const auto& f : r.noisy_labels) targets.push_back(f.node);
        push(ActionKind::correct_labels, QualityIssue::LN, TargetKind::nodes, targets,
             static_cast<double>(targets.size()));
    }
    {
        // Classes whose visible count sits below the generation threshold
        // r_gen * mean class count.
        std::vector<int> targets;
        if (r.visible_labeled > 0) {
            for (int c = 0; c < r.num_classes; ++c) {
                const double share = c < static_cast<int>(r.class_distribution.size())
                                         ? r.class_distribution[c]
                                         : 0.0;
                const double mean_share = 1.0 / r.num_classes;
                if (share < cfg.generation_rate * mean_share) targets.push_back(c);
            }
        }
        push(ActionKind::generate_minority_nodes, QualityIssue::LI, TargetKind::classes, targets,
             static_cast<double>(targets.size()));
    }
    return out;
}

}  // namespace laga::plan
