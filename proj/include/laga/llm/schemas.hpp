#pragma once

#include <array>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace laga::llm {

struct LlmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One tag per provider-backed behavior; the tag picks the prompt template,
// the response schema and the deterministic fallback the caller supplies.
enum class Role {
    plan_severity,
    plan_weights,
    plan_select,
    act_denoise,
    act_complete,
    act_generate,
    learn_augment,
    eval_score,
};

inline constexpr std::array<Role, 8> all_roles() {
    return {Role::plan_severity, Role::plan_weights, Role::plan_select, Role::act_denoise,
            Role::act_complete,  Role::act_generate, Role::learn_augment, Role::eval_score};
}

inline const char* to_string(Role r) {
    switch (r) {
        case Role::plan_severity: return "plan.severity";
        case Role::plan_weights: return "plan.weights";
        case Role::plan_select: return "plan.select";
        case Role::act_denoise: return "act.denoise";
        case Role::act_complete: return "act.complete";
        case Role::act_generate: return "act.generate";
        case Role::learn_augment: return "learn.augment";
        case Role::eval_score: return "eval.score";
    }
    throw LlmError("invalid role");
}

inline Role role_from_string(const std::string& s) {
    for (Role r : all_roles())
        if (s == to_string(r)) return r;
    throw LlmError("unknown role '" + s + "'");
}

inline const char* schema_id(Role r) {
    switch (r) {
        case Role::plan_severity: return "severity/1";
        case Role::plan_weights: return "weights/1";
        case Role::plan_select: return "select/1";
        case Role::act_denoise:
        case Role::act_complete: return "text/1";
        case Role::act_generate: return "generate/1";
        case Role::learn_augment: return "augment/1";
        case Role::eval_score: return "score/1";
    }
    throw LlmError("invalid role");
}

// Structural validation of a provider response. Extra fields are ignored, so
// one superset object can satisfy every schema at once.
inline bool validate_payload(Role role, const nlohmann::json& j) {
    if (!j.is_object()) return false;
    switch (role) {
        case Role::plan_severity: {
            if (!j.contains("severities") || !j["severities"].is_array()) return false;
            if (j["severities"].size() != 9) return false;
            for (const auto& e : j["severities"]) {
                if (!e.is_number_integer()) return false;
                const int v = e.get<int>();
                if (v < 0 || v > 3) return false;
            }
            return true;
        }
        case Role::plan_weights: {
            for (const char* k : {"alpha", "beta", "gamma"})
                if (!j.contains(k) || !j[k].is_number()) return false;
            double mass = 0.0;
            for (const char* k : {"alpha", "beta", "gamma"}) {
                const double v = j[k].get<double>();
                if (!std::isfinite(v)) return false;
                mass += std::max(0.0, v);
            }
            return mass > 0.0;
        }
        case Role::plan_select: {
            if (!j.contains("chosen") || !j["chosen"].is_array()) return false;
            std::set<long long> seen;
            for (const auto& e : j["chosen"]) {
                if (!e.is_number_integer()) return false;
                const long long v = e.get<long long>();
                if (v < 0 || !seen.insert(v).second) return false;
            }
            return true;
        }
        case Role::act_denoise:
        case Role::act_complete:
            return j.contains("text") && j["text"].is_string();
        case Role::act_generate:
            return j.contains("text") && j["text"].is_string() &&
                   !j["text"].get<std::string>().empty();
        case Role::learn_augment: {
            if (!j.contains("summary") || !j["summary"].is_string()) return false;
            if (!j.contains("keywords") || !j["keywords"].is_array()) return false;
            for (const auto& e : j["keywords"])
                if (!e.is_string()) return false;
            return j.contains("pseudo_label") && j["pseudo_label"].is_number_integer() &&
                   j["pseudo_label"].get<int>() >= 0;
        }
        case Role::eval_score: {
            if (!j.contains("q") || !j["q"].is_number()) return false;
            const double q = j["q"].get<double>();
            if (!std::isfinite(q) || q < 0.0 || q > 10.0) return false;
            return j.contains("delta") && j["delta"].is_boolean();
        }
    }
    return false;
}

}  // namespace laga::llm
