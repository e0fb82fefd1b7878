#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "laga/core/issue.hpp"
#include "laga/plan/select.hpp"
#include "laga/plan/severity.hpp"
#include "laga/plan/weights.hpp"

namespace laga::plan {

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Complete output of the planning stage: severity assessment, loss weights,
// the derived candidate list and the budgeted selection over it.
struct PlanReport {
    SeverityAssessment assessment;
    LossWeights weights;
    std::vector<ActionCandidate> candidates;
    PlanSelection selection;
    double budget = 0.0;
    double lambda = 0.0;
    std::string mode = "rules";  // rules | llm
};

inline nlohmann::ordered_json to_json(const PlanReport& p) {
    nlohmann::ordered_json j;
    j["schema"] = "plan/1";
    j["mode"] = p.mode;

    nlohmann::ordered_json sev;
    for (QualityIssue i : all_issues()) {
        nlohmann::ordered_json e;
        e["stat"] = p.assessment.stats[issue_index(i)];
        e["severity"] = p.assessment.severities[issue_index(i)];
        sev[to_string(i)] = e;
    }
    j["severity"] = sev;

    nlohmann::ordered_json prio = nlohmann::ordered_json::array();
    for (QualityIssue i : p.assessment.priority) prio.push_back(to_string(i));
    j["priority"] = prio;
    j["dimension_means"] = {{"text", p.assessment.dimension_means[0]},
                            {"structure", p.assessment.dimension_means[1]},
                            {"label", p.assessment.dimension_means[2]}};
    j["severity_from_fallback"] = p.assessment.from_fallback;

    j["weights"] = {{"alpha", p.weights.alpha},
                    {"beta", p.weights.beta},
                    {"gamma", p.weights.gamma},
                    {"eta", p.weights.eta},
                    {"from_fallback", p.weights.from_fallback}};

    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (const ActionCandidate& c : p.candidates) {
        nlohmann::ordered_json e;
        e["action"] = to_string(c.kind);
        e["issue"] = to_string(c.issue);
        e["target_kind"] = to_string(c.target_kind);
        e["targets"] = c.targets;
        e["utility"] = c.utility;
        e["cost"] = c.cost;
        cands.push_back(std::move(e));
    }
    j["candidates"] = cands;

    j["selection"] = {{"chosen", p.selection.chosen},
                      {"utility", p.selection.utility},
                      {"cost", p.selection.cost},
                      {"objective", p.selection.objective},
                      {"exact", p.selection.exact}};
    j["budget"] = p.budget;
    j["lambda"] = p.lambda;
    return j;
}

inline PlanReport plan_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != "plan/1")
        throw PlanError("unsupported plan schema");
    PlanReport p;
    p.mode = j.value("mode", std::string("rules"));

    const auto& sev = j.at("severity");
    for (QualityIssue i : all_issues()) {
        const auto& e = sev.at(to_string(i));
        p.assessment.stats[issue_index(i)] = e.at("stat").get<double>();
        const int level = e.at("severity").get<int>();
        if (level < 0 || level > 3) throw PlanError("severity level out of range");
        p.assessment.severities[issue_index(i)] = level;
    }
    const auto& prio = j.at("priority");
    if (prio.size() != 9) throw PlanError("priority list must cover all nine issues");
    std::array<bool, 9> seen{};
    for (int r = 0; r < 9; ++r) {
        const QualityIssue i = issue_from_string(prio.at(r).get<std::string>());
        if (seen[issue_index(i)]) throw PlanError("duplicate issue in priority list");
        seen[issue_index(i)] = true;
        p.assessment.priority[r] = i;
    }
    const auto& dm = j.at("dimension_means");
    p.assessment.dimension_means = {dm.at("text").get<double>(),
                                    dm.at("structure").get<double>(),
                                    dm.at("label").get<double>()};
    p.assessment.from_fallback = j.value("severity_from_fallback", false);

    const auto& w = j.at("weights");
    if (!project_weights(w.at("alpha").get<double>(), w.at("beta").get<double>(),
                         w.at("gamma").get<double>(), p.weights))
        throw PlanError("loss weights are unusable");
    p.weights.eta = w.value("eta", 1.0);
    p.weights.from_fallback = w.value("from_fallback", false);

    for (const auto& e : j.at("candidates")) {
        ActionCandidate c;
        c.kind = action_from_string(e.at("action").get<std::string>());
        c.issue = issue_from_string(e.at("issue").get<std::string>());
        c.target_kind = target_kind_from_string(e.at("target_kind").get<std::string>());
        c.targets = e.at("targets").get<std::vector<int>>();
        c.utility = e.at("utility").get<double>();
        c.cost = e.at("cost").get<double>();
        p.candidates.push_back(std::move(c));
    }

    const auto& sel = j.at("selection");
    p.selection.chosen = sel.at("chosen").get<std::vector<std::size_t>>();
    for (std::size_t i : p.selection.chosen)
        if (i >= p.candidates.size()) throw PlanError("selection index out of range");
    p.selection.utility = sel.at("utility").get<double>();
    p.selection.cost = sel.at("cost").get<double>();
    p.selection.objective = sel.at("objective").get<double>();
    p.selection.exact = sel.value("exact", false);

    p.budget = j.at("budget").get<double>();
    p.lambda = j.at("lambda").get<double>();
    return p;
}

// End-to-end rules planning from a detection report.
inline PlanReport make_plan(const detect::DetectionReport& report, const PlanConfig& cfg) {
    PlanReport p;
    p.assessment = assess_severity(report, cfg.rules, cfg.relevance);
    p.weights = loss_weights_from_severity(p.assessment.dimension_means, cfg.eta);
    p.candidates = candidates_from_report(report, p.assessment, cfg);
    p.selection = select_actions(p.candidates, cfg.budget, cfg.lambda, p.assessment.priority);
    p.budget = cfg.budget;
    p.lambda = cfg.lambda;
    return p;
}

}  // namespace laga::plan
