#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "laga/act/program.hpp"
#include "laga/core/graph_io.hpp"
#include "laga/detect/label_metrics.hpp"
#include "laga/detect/report.hpp"
#include "laga/eval/score.hpp"
#include "laga/learn/augment.hpp"
#include "laga/learn/encoder.hpp"
#include "laga/learn/semantic.hpp"
#include "laga/learn/state.hpp"
#include "laga/learn/structural.hpp"
#include "laga/llm/adapters.hpp"
#include "laga/pipeline/config.hpp"
#include "laga/plan/report.hpp"

namespace laga::pipeline {

struct IterationArtifacts {
    detect::DetectionReport report;
    plan::PlanReport plan;
    learn::LearnedState state;
    act::ApplyResult act;
    eval::EvalReport eval;
    TextAttributedGraph graph;  // after the repair program ran
};

// One full detect -> plan -> learn -> act -> evaluate pass over `g`.
inline IterationArtifacts run_iteration(const TextAttributedGraph& g, int iteration,
                                        const std::optional<eval::EvalReport>& prev,
                                        const RunConfig& cfg, const std::string& cfg_hash,
                                        const std::shared_ptr<llm::LlmClient>& client) {
    const detail::RngStream root(cfg.seed);
    const auto iter_u = static_cast<std::uint64_t>(iteration);

    IterationArtifacts out;
    const auto x = learn::encode_graph_features(g, cfg.learn.feature_dim);

    detect::DetectionConfig dcfg = cfg.detect;
    dcfg.seed = root.derive("detect", iter_u).next_u64();
    out.report = detect::detect_graph(g, x.rows, dcfg);

    out.plan = client ? llm::make_plan_llm(out.report, cfg.plan, *client)
                      : plan::make_plan(out.report, cfg.plan);

    const auto diag = detect::compute_label_diagnostics(g, x.rows, dcfg);
    std::vector<std::optional<int>> pseudo(g.n());
    for (int v = 0; v < g.n(); ++v) pseudo[static_cast<std::size_t>(v)] = diag.cluster[v].label;
    const learn::AugmentProvider aug_provider =
        client ? llm::make_augment_provider(client, g.num_classes()) : nullptr;
    const auto aug = learn::augment_texts(g, pseudo, aug_provider);

    learn::TrainOptions opts = cfg.learn.options;
    opts.seed = root.derive("learn", iter_u).next_u64();
    opts.weights = out.plan.weights;
    const auto x_aug = learn::encode_features(aug.enriched, cfg.learn.feature_dim);
    const auto sem = learn::train_semantic(g, x_aug.rows, aug.y_pseudo, opts);
    const auto stu = learn::train_structural(g, x.rows, sem.embeddings, opts);
    out.state = learn::assemble_state(sem, stu, cfg.learn.feature_dim, cfg.seed, cfg_hash);

    act::OptimizeConfig ocfg = cfg.optimize;
    ocfg.seed = root.derive("act", iter_u).next_u64();
    const act::ActProviders providers =
        client ? llm::make_act_providers(client) : act::ActProviders{};
    out.act = act::apply_program(g, out.plan, out.state, aug, out.report, providers, ocfg);
    out.graph = out.act.graph;

    const Eigen::MatrixXd* emb =
        out.state.h_stu.rows() == out.graph.n() ? &out.state.h_stu : nullptr;
    if (client) {
        std::vector<std::string> texts;
        texts.reserve(out.graph.n());
        for (const auto& rec : out.graph.nodes()) texts.push_back(rec.text);
        const auto fx = learn::encode_features(texts, cfg.eval.downstream.feature_dim);
        const auto report_after = detect::detect_graph(out.graph, fx.rows, dcfg);
        eval::DownstreamMetrics down;
        down.accuracy = eval::downstream_classification(out.graph, fx.rows, cfg.eval.downstream);
        if (emb && out.graph.num_classes() >= 2)
            down.clustering_nmi = eval::downstream_clustering(out.graph, *emb, cfg.eval.downstream);
        out.eval = llm::score_quality_llm(report_after, down, prev, iteration, cfg.eval, *client);
    } else {
        out.eval = eval::evaluate_graph(out.graph, emb, prev, iteration, cfg.eval, dcfg);
    }
    return out;
}

struct IterationSummary {
    int iteration = 0;
    double q = 0.0;
    bool delta = false;
    double accuracy = 0.0;
    std::optional<double> clustering_nmi;
    int actions_applied = 0;
    bool act_aborted = false;
    std::string act_error;
    bool stopped = false;  // the stopping rule fired after this iteration
    std::vector<std::pair<std::string, std::string>> artifacts;  // relative path, sha256
};

struct RunRecord {
    std::string config_hash;
    std::string mode = "rules";
    std::uint64_t seed = 0;
    std::string status = "completed";  // completed | failed
    std::string error;
    std::string stop_reason;  // stopping-rule | max-iterations | error
    std::vector<IterationSummary> iterations;
    std::string final_graph;  // relative directory, empty when the run failed early
    std::int64_t llm_calls = 0;
};

inline nlohmann::ordered_json to_json(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["schema"] = "run/1";
    j["config_hash"] = r.config_hash;
    j["mode"] = r.mode;
    j["seed"] = r.seed;
    j["status"] = r.status;
    j["error"] = r.error;
    j["stop_reason"] = r.stop_reason;
    j["iterations"] = nlohmann::ordered_json::array();
    for (const auto& it : r.iterations) {
        nlohmann::ordered_json e;
        e["iteration"] = it.iteration;
        e["q"] = it.q;
        e["delta"] = it.delta;
        e["accuracy"] = it.accuracy;
        if (it.clustering_nmi)
            e["clustering_nmi"] = *it.clustering_nmi;
        else
            e["clustering_nmi"] = nullptr;
        e["actions_applied"] = it.actions_applied;
        e["act_aborted"] = it.act_aborted;
        e["act_error"] = it.act_error;
        e["stopped"] = it.stopped;
        e["artifacts"] = nlohmann::ordered_json::object();
        for (const auto& [path, sha] : it.artifacts) e["artifacts"][path] = sha;
        j["iterations"].push_back(std::move(e));
    }
    j["final_graph"] = r.final_graph;
    j["llm_calls"] = r.llm_calls;
    return j;
}

struct RunOutcome {
    RunRecord record;
    std::filesystem::path dir;
    bool failed = false;
    std::string error;
};

namespace impl {

inline std::string write_text_artifact(const std::filesystem::path& dir,
                                       const std::string& rel, const std::string& content) {
    write_file(dir / rel, content);
    return detail::sha256_hex(content);
}

// Shortest round-trip representation, identical across reruns.
inline std::string fmt_double(double v) { return nlohmann::ordered_json(v).dump(); }

}  // namespace impl

// Drives the iteration loop against the graph at cfg.paths.input, persisting
// every artifact under out_dir. A stage failure is captured in the record
// (status "failed") rather than thrown, so partial runs stay inspectable.
inline RunOutcome run_loop(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           std::shared_ptr<llm::LlmClient> client = nullptr) {
    validate(cfg);
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();

    RunOutcome out;
    out.dir = out_dir;
    out.record.config_hash = config_hash(cfg);
    out.record.mode = cfg.mode;
    out.record.seed = cfg.seed;

    fs::create_directories(out_dir);
    write_file(out_dir / "config.toml", config_to_string(cfg));

    if (cfg.mode == "llm" && !client) {
        llm::ClientConfig ccfg = llm::ClientConfig::from_env();
        ccfg.cache_dir = cfg.llm.cache_dir;
        ccfg.timeout_seconds = cfg.llm.timeout_seconds;
        ccfg.max_in_flight = cfg.llm.max_in_flight;
        ccfg.schema_retries = cfg.llm.schema_retries;
        ccfg.max_tokens = cfg.llm.max_tokens;
        client = std::make_shared<llm::LlmClient>(ccfg);
    }
    if (cfg.mode == "rules") client = nullptr;

    std::string csv = "iteration,q,delta,accuracy,clustering_nmi,actions_applied,aborted\n";
    nlohmann::ordered_json timings;
    timings["schema"] = "timings/1";
    timings["iterations"] = nlohmann::ordered_json::array();

    const auto persist = [&] {
        out.record.llm_calls =
            client ? static_cast<std::int64_t>(client->network_calls()) : 0;
        impl::write_text_artifact(out_dir, "record.json", to_json(out.record).dump(2) + "\n");
        impl::write_text_artifact(out_dir, "metrics.csv", csv);
        timings["total_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        impl::write_text_artifact(out_dir, "timings.json", timings.dump(2) + "\n");
    };

    TextAttributedGraph g;
    try {
        g = load_graph(cfg.paths.input);
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
        out.record.status = "failed";
        out.record.error = out.error;
        out.record.stop_reason = "error";
        persist();
        return out;
    }

    std::optional<eval::EvalReport> prev;
    for (int iteration = 1; iteration <= cfg.eval.max_iters; ++iteration) {
        const auto t_iter = std::chrono::steady_clock::now();
        IterationArtifacts art;
        try {
            art = run_iteration(g, iteration, prev, cfg, out.record.config_hash, client);
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
            out.record.status = "failed";
            out.record.error = out.error;
            out.record.stop_reason = "error";
            persist();
            return out;
        }

        const std::string iter_dir = "iter-" + std::to_string(iteration);
        fs::create_directories(out_dir / iter_dir);

        IterationSummary sum;
        sum.iteration = iteration;
        sum.q = art.eval.q;
        sum.delta = art.eval.delta;
        sum.accuracy = art.eval.downstream.accuracy;
        sum.clustering_nmi = art.eval.downstream.clustering_nmi;
        sum.actions_applied = static_cast<int>(art.act.log["actions"].size());
        sum.act_aborted = art.act.aborted;
        sum.act_error = art.act.error;

        const auto add = [&](const std::string& name, const std::string& content) {
            const std::string rel = iter_dir + "/" + name;
            sum.artifacts.emplace_back(rel, impl::write_text_artifact(out_dir, rel, content));
        };
        add("detect.json", art.report.to_json().dump(2) + "\n");
        add("plan.json", plan::to_json(art.plan).dump(2) + "\n");
        add("changes.json", art.act.log.dump(2) + "\n");
        add("eval.json", eval::to_json(art.eval).dump(2) + "\n");
        learn::save_state(art.state, out_dir / iter_dir / "state.bin");
        sum.artifacts.emplace_back(
            iter_dir + "/state.bin",
            detail::sha256_hex(read_file(out_dir / iter_dir / "state.bin")));

        const bool stop = eval::should_stop(art.eval, prev, cfg.eval);
        sum.stopped = stop;

        csv += std::to_string(iteration) + "," + impl::fmt_double(art.eval.q) + "," +
               (art.eval.delta ? "1" : "0") + "," +
               impl::fmt_double(art.eval.downstream.accuracy) + "," +
               (art.eval.downstream.clustering_nmi
                    ? impl::fmt_double(*art.eval.downstream.clustering_nmi)
                    : std::string()) +
               "," + std::to_string(sum.actions_applied) + "," + (art.act.aborted ? "1" : "0") +
               "\n";

        nlohmann::ordered_json t;
        t["iteration"] = iteration;
        t["seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_iter).count();
        timings["iterations"].push_back(std::move(t));

        out.record.iterations.push_back(std::move(sum));
        g = std::move(art.graph);
        prev = std::move(art.eval);
        if (stop) {
            out.record.stop_reason =
                iteration >= cfg.eval.max_iters ? "max-iterations" : "stopping-rule";
            break;
        }
    }
    if (out.record.stop_reason.empty()) out.record.stop_reason = "max-iterations";

    save_graph(g, out_dir / "final");
    out.record.final_graph = "final";
    persist();
    return out;
}

// In-memory variant used by the benchmark grid: same stage sequence, no
// filesystem traffic.
struct MemoryRunResult {
    TextAttributedGraph graph;
    std::vector<eval::EvalReport> evals;
};

inline MemoryRunResult optimize_in_memory(const TextAttributedGraph& g0, const RunConfig& cfg,
                                          const std::shared_ptr<llm::LlmClient>& client = nullptr) {
    validate(cfg);
    MemoryRunResult out;
    out.graph = g0;
    const std::string hash = config_hash(cfg);
    std::optional<eval::EvalReport> prev;
    for (int iteration = 1; iteration <= cfg.eval.max_iters; ++iteration) {
        auto art = run_iteration(out.graph, iteration, prev, cfg, hash,
                                 cfg.mode == "llm" ? client : nullptr);
        out.graph = std::move(art.graph);
        const bool stop = eval::should_stop(art.eval, prev, cfg.eval);
        prev = art.eval;
        out.evals.push_back(std::move(art.eval));
        if (stop) break;
    }
    return out;
}

}  // namespace laga::pipeline
