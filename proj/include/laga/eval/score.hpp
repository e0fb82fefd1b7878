#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>

#include "json.hpp"

#include "laga/detect/report.hpp"
#include "laga/eval/downstream.hpp"
#include "laga/eval/nmi.hpp"
#include "laga/plan/severity.hpp"

namespace laga::eval {

struct EvalConfig {
    double tau_impf = 8.0;  // first-iteration quality bar
    double tau_imp = 0.3;   // later-iteration improvement threshold
    int max_iters = 3;
    bool stop_on_plateau = false;  // conventional convergence reading
    plan::SeverityRules rules;
    DownstreamConfig downstream;
};

inline void validate(const EvalConfig& cfg) {
    if (cfg.max_iters < 1) throw EvalError("max_iters must be at least 1");
}

struct DownstreamMetrics {
    double accuracy = 0.0;
    std::optional<double> clustering_nmi;
};

struct EvalReport {
    int iteration = 1;
    std::array<double, 9> stats{};
    std::array<double, 9> health{};
    plan::SeverityVector severities{};
    DownstreamMetrics downstream;
    double q = 0.0;
    bool delta = false;
    std::optional<double> prev_q;
};

// Per-issue health: 1 at or better than the mild threshold, 0 at or beyond
// the severe one, linear in between.
inline double issue_health(double stat, const plan::SeverityBands& bands) {
    const double span = bands.t3 - bands.t1;
    if (span <= 0.0) return stat <= bands.t1 ? 1.0 : 0.0;
    return 1.0 - std::clamp((stat - bands.t1) / span, 0.0, 1.0);
}

// Quality score over the re-detected graph: mean issue health blended evenly
// with downstream accuracy, scaled to [0,10]. The flag goes up while any
// issue still rates moderate or worse.
inline EvalReport score_quality(const detect::DetectionReport& report,
                                const DownstreamMetrics& downstream,
                                const std::optional<EvalReport>& prev, int iteration,
                                const EvalConfig& cfg) {
    validate(cfg);
    if (iteration < 1) throw EvalError("score_quality: iteration must be at least 1");
    if (iteration > 1 && !prev)
        throw EvalError("score_quality: missing previous report beyond the first iteration");

    EvalReport out;
    out.iteration = iteration;
    out.stats = plan::issue_statistics(report);
    out.severities = plan::severities_from_stats(out.stats, cfg.rules);
    out.downstream = downstream;

    double mean_health = 0.0;
    for (QualityIssue i : all_issues()) {
        const int idx = issue_index(i);
        out.health[idx] = issue_health(out.stats[idx], cfg.rules.of(i));
        mean_health += out.health[idx];
    }
    mean_health /= 9.0;

    out.q = 10.0 * (0.5 * mean_health + 0.5 * downstream.accuracy);
    out.delta = false;
    for (int s : out.severities)
        if (s >= 2) out.delta = true;
    if (prev) out.prev_q = prev->q;
    return out;
}

// Stopping rule: the first iteration stops on a high score with no remaining
// moderate issue; later iterations stop when the score improved by more than
// tau_imp with no remaining moderate issue. stop_on_plateau inverts the
// improvement test into the conventional convergence check. The iteration
// cap always stops.
inline bool should_stop(const EvalReport& report, const std::optional<EvalReport>& prev,
                        const EvalConfig& cfg) {
    validate(cfg);
    if (report.iteration >= cfg.max_iters) return true;
    if (report.iteration <= 1) return report.q > cfg.tau_impf && !report.delta;
    if (!prev) throw EvalError("should_stop: missing previous report");
    const double gain = report.q - prev->q;
    if (cfg.stop_on_plateau) return gain <= cfg.tau_imp;
    return gain > cfg.tau_imp && !report.delta;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = "eval/1";
    j["iteration"] = r.iteration;
    nlohmann::ordered_json issues;
    for (QualityIssue i : all_issues()) {
        const int idx = issue_index(i);
        issues[to_string(i)] = {{"stat", r.stats[idx]},
                                {"health", r.health[idx]},
                                {"severity", r.severities[idx]}};
    }
    j["issues"] = issues;
    j["downstream"]["accuracy"] = r.downstream.accuracy;
    if (r.downstream.clustering_nmi)
        j["downstream"]["clustering_nmi"] = *r.downstream.clustering_nmi;
    else
        j["downstream"]["clustering_nmi"] = nullptr;
    j["q"] = r.q;
    j["delta"] = r.delta;
    if (r.prev_q)
        j["prev_q"] = *r.prev_q;
    else
        j["prev_q"] = nullptr;
    return j;
}

inline EvalReport eval_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != "eval/1")
        throw EvalError("unsupported eval schema");
    EvalReport r;
    r.iteration = j.at("iteration").get<int>();
    const auto& issues = j.at("issues");
    for (QualityIssue i : all_issues()) {
        const auto& e = issues.at(to_string(i));
        const int idx = issue_index(i);
        r.stats[idx] = e.at("stat").get<double>();
        r.health[idx] = e.at("health").get<double>();
        r.severities[idx] = e.at("severity").get<int>();
    }
    r.downstream.accuracy = j.at("downstream").at("accuracy").get<double>();
    if (!j.at("downstream").at("clustering_nmi").is_null())
        r.downstream.clustering_nmi = j.at("downstream").at("clustering_nmi").get<double>();
    r.q = j.at("q").get<double>();
    r.delta = j.at("delta").get<bool>();
    if (!j.at("prev_q").is_null()) r.prev_q = j.at("prev_q").get<double>();
    return r;
}

// Full evaluation pass: re-detect, run the downstream tasks and score.
// Clustering joins the report only when embeddings for the current graph are
// on hand.
inline EvalReport evaluate_graph(const TextAttributedGraph& g,
                                 const Eigen::MatrixXd* embeddings,
                                 const std::optional<EvalReport>& prev, int iteration,
                                 const EvalConfig& cfg, const detect::DetectionConfig& dcfg) {
    std::vector<std::string> texts;
    texts.reserve(g.n());
    for (int v = 0; v < g.n(); ++v) texts.push_back(g.node(v).text);
    const auto features = learn::encode_features(texts, cfg.downstream.feature_dim);
    const auto report = detect::detect_graph(g, features.rows, dcfg);

    DownstreamMetrics down;
    down.accuracy = downstream_classification(g, features.rows, cfg.downstream);
    if (embeddings && embeddings->rows() == g.n() && g.num_classes() >= 2)
        down.clustering_nmi = downstream_clustering(g, *embeddings, cfg.downstream);
    return score_quality(report, down, prev, iteration, cfg);
}

}  // namespace laga::eval
