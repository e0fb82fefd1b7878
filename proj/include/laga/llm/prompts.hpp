#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "laga/llm/schemas.hpp"

namespace laga::llm {

// Versioned prompt templates. The full prompt text enters the cache key, so
// editing a template (or bumping its version line) invalidates stale cached
// responses automatically.

inline constexpr std::string_view kSeverityPromptV1 =
    "laga.plan.severity v1\n"
    "You grade quality statistics of a text-attributed graph. The input lists nine\n"
    "issue statistics in the order TS, TN, TI, SS, SN, SI, LS, LN, LI, each scaled\n"
    "so that larger is worse. Grade each issue 0 (none), 1 (mild), 2 (moderate) or\n"
    "3 (severe). Respond with JSON only: {\"severities\": [nine integers]}.";

inline constexpr std::string_view kWeightsPromptV1 =
    "laga.plan.weights v1\n"
    "You tune loss weights for training on a partly degraded graph. The input gives\n"
    "mean severities per dimension (text, structure, label) and the rule-derived\n"
    "starting weights. More degraded dimensions deserve less weight. Respond with\n"
    "JSON only: {\"alpha\": number, \"beta\": number, \"gamma\": number}, all\n"
    "nonnegative; they will be renormalized to sum to one.";

inline constexpr std::string_view kSelectPromptV1 =
    "laga.plan.select v1\n"
    "You pick repair actions under a budget. The input lists candidate actions with\n"
    "utility and cost, plus the budget and the cost penalty lambda. Maximize total\n"
    "utility minus lambda times total cost, keeping total cost within the budget.\n"
    "Respond with JSON only: {\"chosen\": [candidate indices]}.";

inline constexpr std::string_view kDenoisePromptV1 =
    "laga.act.denoise v1\n"
    "Clean the node text: drop corrupted or meaningless tokens, keep every valid\n"
    "token in its original form and order, and add nothing. Respond with JSON\n"
    "only: {\"text\": cleaned text}.";

inline constexpr std::string_view kCompletePromptV1 =
    "laga.act.complete v1\n"
    "Complete the sparse node text. The context holds texts of linked nodes; append\n"
    "the few topic keywords the node is missing, changing nothing else. Respond\n"
    "with JSON only: {\"text\": completed text}.";

inline constexpr std::string_view kGeneratePromptV1 =
    "laga.act.generate v1\n"
    "Write one short node text for the given class of a text-attributed graph. The\n"
    "context holds sample texts of that class; match their topic and style. Respond\n"
    "with JSON only: {\"text\": generated text}.";

inline constexpr std::string_view kAugmentPromptV1 =
    "laga.learn.augment v1\n"
    "Augment the node text: a one-to-two sentence summary, up to five topic\n"
    "keywords, and the most plausible class index below num_classes. Respond with\n"
    "JSON only: {\"summary\": string, \"keywords\": [strings], \"pseudo_label\":\n"
    "integer}.";

inline constexpr std::string_view kScorePromptV1 =
    "laga.eval.score v1\n"
    "Score the overall quality of an optimized graph from its nine issue\n"
    "statistics, per-issue severities and downstream accuracy. q runs from 0\n"
    "(unusable) to 10 (flawless); delta is true while any notable defect remains.\n"
    "Respond with JSON only: {\"q\": number, \"delta\": boolean}.";

inline std::string_view prompt_template(Role r) {
    switch (r) {
        case Role::plan_severity: return kSeverityPromptV1;
        case Role::plan_weights: return kWeightsPromptV1;
        case Role::plan_select: return kSelectPromptV1;
        case Role::act_denoise: return kDenoisePromptV1;
        case Role::act_complete: return kCompletePromptV1;
        case Role::act_generate: return kGeneratePromptV1;
        case Role::learn_augment: return kAugmentPromptV1;
        case Role::eval_score: return kScorePromptV1;
    }
    throw LlmError("invalid role");
}

// Template plus the serialized task input. ordered_json keeps key order (and
// therefore the cache key) stable across builds.
inline std::string build_prompt(Role r, const nlohmann::ordered_json& input) {
    std::string out{prompt_template(r)};
    out += "\n\nINPUT\n";
    out += input.dump(2);
    return out;
}

}  // namespace laga::llm
