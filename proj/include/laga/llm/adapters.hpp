#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "laga/llm/client.hpp"  // first: scrubs macros leaked by network headers

#include "laga/act/program.hpp"
#include "laga/eval/score.hpp"
#include "laga/learn/augment.hpp"
#include "laga/plan/report.hpp"

namespace laga::llm {

namespace impl {

inline void order_by_priority(std::vector<std::size_t>& chosen,
                              const std::vector<plan::ActionCandidate>& candidates,
                              const std::array<QualityIssue, 9>& priority) {
    auto rank = [&](QualityIssue issue) {
        for (int r = 0; r < 9; ++r)
            if (priority[r] == issue) return r;
        return 9;
    };
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        const int ra = rank(candidates[a].issue);
        const int rb = rank(candidates[b].issue);
        if (ra != rb) return ra < rb;
        return a < b;
    });
}

}  // namespace impl

// Planning with provider-backed severity grading, weight adjustment and
// action selection. Each stage degrades independently to its rule result:
// severities on provider failure, weights on an unusable triple, selection on
// an out-of-range or over-budget pick.
inline plan::PlanReport make_plan_llm(const detect::DetectionReport& report,
                                      const plan::PlanConfig& cfg, LlmClient& client) {
    plan::PlanReport p;
    p.mode = "llm";

    const auto rule = plan::assess_severity(report, cfg.rules, cfg.relevance);

    nlohmann::ordered_json sev_input;
    {
        nlohmann::ordered_json stats;
        for (QualityIssue i : all_issues()) stats[to_string(i)] = rule.stats[issue_index(i)];
        sev_input["statistics"] = stats;
    }
    ProviderRequest sreq;
    sreq.role = Role::plan_severity;
    sreq.prompt = build_prompt(Role::plan_severity, sev_input);
    sreq.fallback = nlohmann::json{{"severities", rule.severities}};
    const auto sresp = client.complete(sreq);

    p.assessment.stats = rule.stats;
    const auto& sev = sresp.payload.at("severities");
    for (int i = 0; i < 9; ++i) p.assessment.severities[i] = sev.at(i).get<int>();
    p.assessment.priority = plan::priority_order(p.assessment.severities, cfg.relevance);
    p.assessment.dimension_means = plan::dimension_means(p.assessment.severities);
    p.assessment.from_fallback = sresp.fallback;

    const auto rule_w = plan::loss_weights_from_severity(p.assessment.dimension_means, cfg.eta);
    nlohmann::ordered_json w_input;
    w_input["dimension_means"] = {{"text", p.assessment.dimension_means[0]},
                                  {"structure", p.assessment.dimension_means[1]},
                                  {"label", p.assessment.dimension_means[2]}};
    w_input["initial"] = {
        {"alpha", rule_w.alpha}, {"beta", rule_w.beta}, {"gamma", rule_w.gamma}};
    ProviderRequest wreq;
    wreq.role = Role::plan_weights;
    wreq.prompt = build_prompt(Role::plan_weights, w_input);
    wreq.fallback = nlohmann::json{
        {"alpha", rule_w.alpha}, {"beta", rule_w.beta}, {"gamma", rule_w.gamma}};
    const auto wresp = client.complete(wreq);

    plan::LossWeights w;
    if (plan::project_weights(wresp.payload.at("alpha").get<double>(),
                              wresp.payload.at("beta").get<double>(),
                              wresp.payload.at("gamma").get<double>(), w)) {
        w.eta = cfg.eta;
        w.from_fallback = wresp.fallback;
    } else {
        w = rule_w;
        w.from_fallback = true;
    }
    p.weights = w;

    p.candidates = plan::candidates_from_report(report, p.assessment, cfg);
    const auto rule_sel =
        plan::select_actions(p.candidates, cfg.budget, cfg.lambda, p.assessment.priority);

    nlohmann::ordered_json sel_input;
    sel_input["budget"] = cfg.budget;
    sel_input["lambda"] = cfg.lambda;
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < p.candidates.size(); ++i) {
        const auto& c = p.candidates[i];
        arr.push_back(nlohmann::ordered_json{{"index", i},
                                             {"action", plan::to_string(c.kind)},
                                             {"issue", to_string(c.issue)},
                                             {"targets", c.targets.size()},
                                             {"utility", c.utility},
                                             {"cost", c.cost}});
    }
    sel_input["candidates"] = arr;
    ProviderRequest selreq;
    selreq.role = Role::plan_select;
    selreq.prompt = build_prompt(Role::plan_select, sel_input);
    selreq.fallback = nlohmann::json{{"chosen", rule_sel.chosen}};
    const auto selresp = client.complete(selreq);

    bool usable = !selresp.fallback;
    plan::PlanSelection sel;
    if (usable) {
        for (const auto& e : selresp.payload.at("chosen")) {
            const long long idx = e.get<long long>();
            if (idx < 0 || idx >= static_cast<long long>(p.candidates.size())) {
                usable = false;
                break;
            }
            sel.chosen.push_back(static_cast<std::size_t>(idx));
            sel.utility += p.candidates[idx].utility;
            sel.cost += p.candidates[idx].cost;
        }
        if (usable && sel.cost > cfg.budget + 1e-9) usable = false;
    }
    if (usable) {
        impl::order_by_priority(sel.chosen, p.candidates, p.assessment.priority);
        sel.objective = sel.utility - cfg.lambda * sel.cost;
        sel.exact = false;
        p.selection = sel;
    } else {
        p.selection = rule_sel;
    }

    p.budget = cfg.budget;
    p.lambda = cfg.lambda;
    return p;
}

// Text and generation hooks for the repair operators. A provider failure
// returns nullopt, which hands the item to the deterministic local repair.
inline act::ActProviders make_act_providers(std::shared_ptr<LlmClient> client) {
    act::ActProviders p;
    p.text = [client](act::TextTask task, int node, const std::string& text,
                      const std::string& context) -> std::optional<std::string> {
        const Role role =
            task == act::TextTask::denoise ? Role::act_denoise : Role::act_complete;
        nlohmann::ordered_json input{{"node", node}, {"text", text}, {"context", context}};
        ProviderRequest req;
        req.role = role;
        req.prompt = build_prompt(role, input);
        req.fallback = nlohmann::json{{"text", text}};
        const auto resp = client->complete(req);
        if (resp.fallback) return std::nullopt;
        return resp.payload.at("text").get<std::string>();
    };
    p.generate = [client](int class_id,
                          const std::string& context) -> std::optional<std::string> {
        nlohmann::ordered_json input{{"class", class_id}, {"context", context}};
        ProviderRequest req;
        req.role = Role::act_generate;
        req.prompt = build_prompt(Role::act_generate, input);
        req.fallback = nlohmann::json{{"text", "class " + std::to_string(class_id)}};
        const auto resp = client->complete(req);
        if (resp.fallback) return std::nullopt;
        return resp.payload.at("text").get<std::string>();
    };
    return p;
}

inline learn::AugmentProvider make_augment_provider(std::shared_ptr<LlmClient> client,
                                                    int num_classes) {
    return [client, num_classes](
               int node, const std::string& text) -> std::optional<learn::AugmentResponse> {
        nlohmann::ordered_json input{
            {"node", node}, {"num_classes", num_classes}, {"text", text}};
        ProviderRequest req;
        req.role = Role::learn_augment;
        req.prompt = build_prompt(Role::learn_augment, input);
        req.fallback = nlohmann::json{
            {"summary", ""}, {"keywords", nlohmann::json::array()}, {"pseudo_label", 0}};
        const auto resp = client->complete(req);
        if (resp.fallback) return std::nullopt;
        learn::AugmentResponse out;
        out.summary = resp.payload.at("summary").get<std::string>();
        out.keywords = resp.payload.at("keywords").get<std::vector<std::string>>();
        out.pseudo_label = resp.payload.at("pseudo_label").get<int>();
        return out;
    };
}

// Quality scoring with a provider-graded (q, delta); statistics, health and
// severities stay rule-computed so the report remains audit-friendly.
inline eval::EvalReport score_quality_llm(const detect::DetectionReport& report,
                                          const eval::DownstreamMetrics& downstream,
                                          const std::optional<eval::EvalReport>& prev,
                                          int iteration, const eval::EvalConfig& cfg,
                                          LlmClient& client) {
    auto out = eval::score_quality(report, downstream, prev, iteration, cfg);

    nlohmann::ordered_json input;
    nlohmann::ordered_json issues;
    for (QualityIssue i : all_issues())
        issues[to_string(i)] = nlohmann::ordered_json{
            {"stat", out.stats[issue_index(i)]}, {"severity", out.severities[issue_index(i)]}};
    input["issues"] = issues;
    input["accuracy"] = downstream.accuracy;
    if (downstream.clustering_nmi) input["clustering_nmi"] = *downstream.clustering_nmi;
    input["iteration"] = iteration;
    if (prev) input["previous_q"] = prev->q;

    ProviderRequest req;
    req.role = Role::eval_score;
    req.prompt = build_prompt(Role::eval_score, input);
    req.fallback = nlohmann::json{{"q", out.q}, {"delta", out.delta}};
    const auto resp = client.complete(req);
    out.q = resp.payload.at("q").get<double>();
    out.delta = resp.payload.at("delta").get<bool>();
    return out;
}

}  // namespace laga::llm
