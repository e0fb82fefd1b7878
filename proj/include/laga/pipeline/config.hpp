#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "laga/act/config.hpp"
#include "laga/detail/sha256.hpp"
#include "laga/detail/toml.hpp"
#include "laga/detect/config.hpp"
#include "laga/eval/score.hpp"
#include "laga/learn/common.hpp"
#include "laga/perturb/scenario.hpp"
#include "laga/plan/select.hpp"

namespace laga::pipeline {

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunPaths {
    std::string input;           // graph directory
    std::string output = "runs"; // run directories are created under here
    std::string name = "run";
};

struct LearnConfig {
    int feature_dim = 256;
    learn::TrainOptions options;  // weights are overwritten by the plan stage
};

struct LlmSettings {
    std::string cache_dir = ".llm-cache";
    int timeout_seconds = 60;
    int max_in_flight = 4;
    int schema_retries = 2;
    int max_tokens = 512;
};

struct BenchConfig {
    std::vector<perturb::ScenarioKind> kinds = perturb::all_scenarios();
    std::vector<double> ratios = {0.2, 0.4, 0.8};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int threads = 1;
};

struct RunConfig {
    RunPaths paths;
    std::string mode = "rules";  // rules | llm
    std::uint64_t seed = 0;
    detect::DetectionConfig detect;
    plan::PlanConfig plan;
    LearnConfig learn;
    act::OptimizeConfig optimize;
    eval::EvalConfig eval;
    LlmSettings llm;
    BenchConfig bench;
};

inline void validate(const RunConfig& cfg) {
    if (cfg.mode != "rules" && cfg.mode != "llm")
        throw PipelineError("mode must be 'rules' or 'llm', got '" + cfg.mode + "'");
    if (cfg.learn.feature_dim < 1) throw PipelineError("learn.feature_dim must be positive");
    if (cfg.learn.options.hidden < 1) throw PipelineError("learn.hidden must be positive");
    if (cfg.learn.options.epochs < 0) throw PipelineError("learn.epochs must be nonnegative");
    if (cfg.eval.max_iters < 1) throw PipelineError("eval.max_iters must be positive");
    if (cfg.eval.downstream.seeds.empty())
        throw PipelineError("eval.downstream.seeds must not be empty");
    if (cfg.llm.max_in_flight < 1) throw PipelineError("llm.max_in_flight must be positive");
    if (cfg.llm.timeout_seconds < 1) throw PipelineError("llm.timeout_seconds must be positive");
    if (cfg.bench.threads < 1) throw PipelineError("bench.threads must be positive");
    if (cfg.bench.kinds.empty()) throw PipelineError("bench.kinds must not be empty");
    for (double r : cfg.bench.ratios)
        if (r < 0.0 || r > 1.0) throw PipelineError("bench.ratios must lie in [0,1]");
    act::validate(cfg.optimize);
}

namespace impl {

using detail::toml::Table;
using detail::toml::Value;

inline const Table& section(const Table& root, const std::string& name, const Table& fallback) {
    const Value* v = detail::toml::find(root, name);
    if (!v) return fallback;
    if (!v->is_table()) throw PipelineError("[" + name + "] must be a table");
    return v->as_table();
}

// Rejects unknown keys so config typos fail loudly instead of silently
// keeping a default.
inline void check_keys(const Table& t, const std::string& where,
                       std::initializer_list<const char*> known) {
    for (const auto& [key, value] : t) {
        if (value.is_table()) continue;  // nested sections are checked separately
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw PipelineError("unknown key '" + key + "' in [" + where + "]");
    }
}

inline double get_double(const Table& t, const char* key, double def) {
    const Value* v = detail::toml::find(t, key);
    if (!v) return def;
    if (!v->is_float() && !v->is_int()) throw PipelineError(std::string(key) + " must be a number");
    return v->as_float();
}

inline std::int64_t get_int(const Table& t, const char* key, std::int64_t def) {
    const Value* v = detail::toml::find(t, key);
    if (!v) return def;
    if (!v->is_int()) throw PipelineError(std::string(key) + " must be an integer");
    return v->as_int();
}

inline bool get_bool(const Table& t, const char* key, bool def) {
    const Value* v = detail::toml::find(t, key);
    if (!v) return def;
    if (!v->is_bool()) throw PipelineError(std::string(key) + " must be a boolean");
    return v->as_bool();
}

inline std::string get_string(const Table& t, const char* key, std::string def) {
    const Value* v = detail::toml::find(t, key);
    if (!v) return def;
    if (!v->is_string()) throw PipelineError(std::string(key) + " must be a string");
    return v->as_string();
}

inline std::vector<double> get_doubles(const Table& t, const char* key,
                                       std::vector<double> def) {
    const Value* v = detail::toml::find(t, key);
    if (!v) return def;
    if (!v->is_array()) throw PipelineError(std::string(key) + " must be an array");
    std::vector<double> out;
    for (const auto& e : v->as_array()) {
        if (!e.is_float() && !e.is_int())
            throw PipelineError(std::string(key) + " must hold numbers");
        out.push_back(e.as_float());
    }
    return out;
}

inline std::vector<std::uint64_t> get_seeds(const Table& t, const char* key,
                                            std::vector<std::uint64_t> def) {
    const Value* v = detail::toml::find(t, key);
    if (!v) return def;
    if (!v->is_array()) throw PipelineError(std::string(key) + " must be an array");
    std::vector<std::uint64_t> out;
    for (const auto& e : v->as_array()) {
        if (!e.is_int() || e.as_int() < 0)
            throw PipelineError(std::string(key) + " must hold nonnegative integers");
        out.push_back(static_cast<std::uint64_t>(e.as_int()));
    }
    return out;
}

}  // namespace impl

inline RunConfig config_from_toml(const detail::toml::Table& root) {
    using namespace impl;
    static const Table empty;
    RunConfig cfg;

    for (const auto& [key, value] : root) {
        if (!value.is_table()) throw PipelineError("top-level key '" + key + "' outside a section");
        if (key != "run" && key != "detect" && key != "plan" && key != "learn" &&
            key != "optimize" && key != "eval" && key != "llm" && key != "bench")
            throw PipelineError("unknown section [" + key + "]");
    }

    const Table& run = section(root, "run", empty);
    check_keys(run, "run", {"input", "output", "name", "mode", "seed"});
    cfg.paths.input = get_string(run, "input", "");
    cfg.paths.output = get_string(run, "output", cfg.paths.output);
    cfg.paths.name = get_string(run, "name", cfg.paths.name);
    cfg.mode = get_string(run, "mode", cfg.mode);
    cfg.seed = static_cast<std::uint64_t>(get_int(run, "seed", 0));

    const Table& det = section(root, "detect", empty);
    check_keys(det, "detect",
               {"tau_sparse_tokens", "tau_noise", "tau_informativeness",
                "informativeness_percentile", "mean_degree_ref", "density_ref", "jaccard_ref",
                "entropy_ref", "gini_ref", "tau_consistency", "kmeans_max_k",
                "kmeans_restarts"});
    auto& d = cfg.detect;
    d.tau_sparse_tokens = static_cast<int>(get_int(det, "tau_sparse_tokens", d.tau_sparse_tokens));
    d.tau_noise = get_double(det, "tau_noise", d.tau_noise);
    if (detail::toml::find(det, "tau_informativeness"))
        d.tau_informativeness = get_double(det, "tau_informativeness", 0.0);
    d.informativeness_percentile =
        get_double(det, "informativeness_percentile", d.informativeness_percentile);
    d.mean_degree_ref = get_double(det, "mean_degree_ref", d.mean_degree_ref);
    d.density_ref = get_double(det, "density_ref", d.density_ref);
    d.jaccard_ref = get_double(det, "jaccard_ref", d.jaccard_ref);
    d.entropy_ref = get_double(det, "entropy_ref", d.entropy_ref);
    d.gini_ref = get_double(det, "gini_ref", d.gini_ref);
    d.tau_consistency = get_double(det, "tau_consistency", d.tau_consistency);
    d.kmeans_max_k = static_cast<int>(get_int(det, "kmeans_max_k", d.kmeans_max_k));
    d.kmeans_restarts = static_cast<int>(get_int(det, "kmeans_restarts", d.kmeans_restarts));

    const Table& pl = section(root, "plan", empty);
    check_keys(pl, "plan",
               {"eta", "budget", "lambda", "relevance", "completion_degree",
                "generation_rate"});
    cfg.plan.eta = get_double(pl, "eta", cfg.plan.eta);
    cfg.plan.budget = get_double(pl, "budget", cfg.plan.budget);
    cfg.plan.lambda = get_double(pl, "lambda", cfg.plan.lambda);
    cfg.plan.completion_degree =
        static_cast<int>(get_int(pl, "completion_degree", cfg.plan.completion_degree));
    cfg.plan.generation_rate = get_double(pl, "generation_rate", cfg.plan.generation_rate);
    {
        std::vector<double> rel(cfg.plan.relevance.begin(), cfg.plan.relevance.end());
        rel = get_doubles(pl, "relevance", rel);
        if (rel.size() != 9) throw PipelineError("plan.relevance must list nine values");
        std::copy(rel.begin(), rel.end(), cfg.plan.relevance.begin());
    }

    const Table& le = section(root, "learn", empty);
    check_keys(le, "learn",
               {"feature_dim", "hidden", "learning_rate", "epochs", "tau",
                "negatives_per_node", "max_pair_samples"});
    cfg.learn.feature_dim = static_cast<int>(get_int(le, "feature_dim", cfg.learn.feature_dim));
    auto& lo = cfg.learn.options;
    lo.hidden = static_cast<int>(get_int(le, "hidden", lo.hidden));
    lo.learning_rate = get_double(le, "learning_rate", lo.learning_rate);
    lo.epochs = static_cast<int>(get_int(le, "epochs", lo.epochs));
    lo.tau = get_double(le, "tau", lo.tau);
    lo.negatives_per_node =
        static_cast<int>(get_int(le, "negatives_per_node", lo.negatives_per_node));
    lo.max_pair_samples =
        static_cast<int>(get_int(le, "max_pair_samples", lo.max_pair_samples));

    const Table& op = section(root, "optimize", empty);
    check_keys(op, "optimize", {"k_edge", "tau_edge", "tau_lape", "lambda_label", "r_gen"});
    auto& o = cfg.optimize;
    o.k_edge = static_cast<int>(get_int(op, "k_edge", o.k_edge));
    o.tau_edge = get_double(op, "tau_edge", o.tau_edge);
    o.tau_lape = get_double(op, "tau_lape", o.tau_lape);
    o.lambda_label = get_double(op, "lambda_label", o.lambda_label);
    o.r_gen = get_double(op, "r_gen", o.r_gen);

    const Table& ev = section(root, "eval", empty);
    check_keys(ev, "eval", {"tau_impf", "tau_imp", "max_iters", "stop_on_plateau"});
    cfg.eval.tau_impf = get_double(ev, "tau_impf", cfg.eval.tau_impf);
    cfg.eval.tau_imp = get_double(ev, "tau_imp", cfg.eval.tau_imp);
    cfg.eval.max_iters = static_cast<int>(get_int(ev, "max_iters", cfg.eval.max_iters));
    cfg.eval.stop_on_plateau = get_bool(ev, "stop_on_plateau", cfg.eval.stop_on_plateau);

    const Table& dn = section(ev, "downstream", empty);
    check_keys(dn, "eval.downstream",
               {"seeds", "feature_dim", "hidden", "learning_rate", "epochs",
                "kmeans_restarts", "cluster_seed"});
    auto& ds = cfg.eval.downstream;
    ds.seeds = get_seeds(dn, "seeds", ds.seeds);
    ds.feature_dim = static_cast<int>(get_int(dn, "feature_dim", ds.feature_dim));
    ds.hidden = static_cast<int>(get_int(dn, "hidden", ds.hidden));
    ds.learning_rate = get_double(dn, "learning_rate", ds.learning_rate);
    ds.epochs = static_cast<int>(get_int(dn, "epochs", ds.epochs));
    ds.kmeans_restarts = static_cast<int>(get_int(dn, "kmeans_restarts", ds.kmeans_restarts));
    ds.cluster_seed = static_cast<std::uint64_t>(get_int(dn, "cluster_seed", 0));

    const Table& lm = section(root, "llm", empty);
    check_keys(lm, "llm",
               {"cache_dir", "timeout_seconds", "max_in_flight", "schema_retries",
                "max_tokens"});
    cfg.llm.cache_dir = get_string(lm, "cache_dir", cfg.llm.cache_dir);
    cfg.llm.timeout_seconds =
        static_cast<int>(get_int(lm, "timeout_seconds", cfg.llm.timeout_seconds));
    cfg.llm.max_in_flight =
        static_cast<int>(get_int(lm, "max_in_flight", cfg.llm.max_in_flight));
    cfg.llm.schema_retries =
        static_cast<int>(get_int(lm, "schema_retries", cfg.llm.schema_retries));
    cfg.llm.max_tokens = static_cast<int>(get_int(lm, "max_tokens", cfg.llm.max_tokens));

    const Table& be = section(root, "bench", empty);
    check_keys(be, "bench", {"kinds", "ratios", "seeds", "threads"});
    if (const auto* v = detail::toml::find(be, "kinds")) {
        if (!v->is_array()) throw PipelineError("bench.kinds must be an array");
        cfg.bench.kinds.clear();
        for (const auto& e : v->as_array()) {
            if (!e.is_string()) throw PipelineError("bench.kinds must hold strings");
            try {
                cfg.bench.kinds.push_back(perturb::scenario_from_string(e.as_string()));
            } catch (const std::exception& ex) {
                throw PipelineError(std::string("bench.kinds: ") + ex.what());
            }
        }
    }
    cfg.bench.ratios = get_doubles(be, "ratios", cfg.bench.ratios);
    cfg.bench.seeds = get_seeds(be, "seeds", cfg.bench.seeds);
    cfg.bench.threads = static_cast<int>(get_int(be, "threads", cfg.bench.threads));

    validate(cfg);
    return cfg;
}

inline detail::toml::Table config_to_toml(const RunConfig& cfg) {
    using detail::toml::Array;
    using detail::toml::Table;
    using detail::toml::Value;
    Table root;

    Table run;
    run.emplace("input", cfg.paths.input);
    run.emplace("output", cfg.paths.output);
    run.emplace("name", cfg.paths.name);
    run.emplace("mode", cfg.mode);
    run.emplace("seed", static_cast<std::int64_t>(cfg.seed));
    root.emplace("run", std::move(run));

    Table det;
    det.emplace("tau_sparse_tokens", cfg.detect.tau_sparse_tokens);
    det.emplace("tau_noise", cfg.detect.tau_noise);
    if (cfg.detect.tau_informativeness)
        det.emplace("tau_informativeness", *cfg.detect.tau_informativeness);
    det.emplace("informativeness_percentile", cfg.detect.informativeness_percentile);
    det.emplace("mean_degree_ref", cfg.detect.mean_degree_ref);
    det.emplace("density_ref", cfg.detect.density_ref);
    det.emplace("jaccard_ref", cfg.detect.jaccard_ref);
    det.emplace("entropy_ref", cfg.detect.entropy_ref);
    det.emplace("gini_ref", cfg.detect.gini_ref);
    det.emplace("tau_consistency", cfg.detect.tau_consistency);
    det.emplace("kmeans_max_k", cfg.detect.kmeans_max_k);
    det.emplace("kmeans_restarts", cfg.detect.kmeans_restarts);
    root.emplace("detect", std::move(det));

    Table pl;
    pl.emplace("eta", cfg.plan.eta);
    pl.emplace("budget", cfg.plan.budget);
    pl.emplace("lambda", cfg.plan.lambda);
    pl.emplace("completion_degree", cfg.plan.completion_degree);
    pl.emplace("generation_rate", cfg.plan.generation_rate);
    Array rel;
    for (double r : cfg.plan.relevance) rel.emplace_back(r);
    pl.emplace("relevance", std::move(rel));
    root.emplace("plan", std::move(pl));

    Table le;
    le.emplace("feature_dim", cfg.learn.feature_dim);
    le.emplace("hidden", cfg.learn.options.hidden);
    le.emplace("learning_rate", cfg.learn.options.learning_rate);
    le.emplace("epochs", cfg.learn.options.epochs);
    le.emplace("tau", cfg.learn.options.tau);
    le.emplace("negatives_per_node", cfg.learn.options.negatives_per_node);
    le.emplace("max_pair_samples", cfg.learn.options.max_pair_samples);
    root.emplace("learn", std::move(le));

    Table op;
    op.emplace("k_edge", cfg.optimize.k_edge);
    op.emplace("tau_edge", cfg.optimize.tau_edge);
    op.emplace("tau_lape", cfg.optimize.tau_lape);
    op.emplace("lambda_label", cfg.optimize.lambda_label);
    op.emplace("r_gen", cfg.optimize.r_gen);
    root.emplace("optimize", std::move(op));

    Table ev;
    ev.emplace("tau_impf", cfg.eval.tau_impf);
    ev.emplace("tau_imp", cfg.eval.tau_imp);
    ev.emplace("max_iters", cfg.eval.max_iters);
    ev.emplace("stop_on_plateau", cfg.eval.stop_on_plateau);
    Table dn;
    Array seeds;
    for (std::uint64_t s : cfg.eval.downstream.seeds)
        seeds.emplace_back(static_cast<std::int64_t>(s));
    dn.emplace("seeds", std::move(seeds));
    dn.emplace("feature_dim", cfg.eval.downstream.feature_dim);
    dn.emplace("hidden", cfg.eval.downstream.hidden);
    dn.emplace("learning_rate", cfg.eval.downstream.learning_rate);
    dn.emplace("epochs", cfg.eval.downstream.epochs);
    dn.emplace("kmeans_restarts", cfg.eval.downstream.kmeans_restarts);
    dn.emplace("cluster_seed", static_cast<std::int64_t>(cfg.eval.downstream.cluster_seed));
    ev.emplace("downstream", std::move(dn));
    root.emplace("eval", std::move(ev));

    Table lm;
    lm.emplace("cache_dir", cfg.llm.cache_dir);
    lm.emplace("timeout_seconds", cfg.llm.timeout_seconds);
    lm.emplace("max_in_flight", cfg.llm.max_in_flight);
    lm.emplace("schema_retries", cfg.llm.schema_retries);
    lm.emplace("max_tokens", cfg.llm.max_tokens);
    root.emplace("llm", std::move(lm));

    Table be;
    Array kinds;
    for (perturb::ScenarioKind k : cfg.bench.kinds) kinds.emplace_back(perturb::to_string(k));
    be.emplace("kinds", std::move(kinds));
    Array ratios;
    for (double r : cfg.bench.ratios) ratios.emplace_back(r);
    be.emplace("ratios", std::move(ratios));
    Array bseeds;
    for (std::uint64_t s : cfg.bench.seeds) bseeds.emplace_back(static_cast<std::int64_t>(s));
    be.emplace("seeds", std::move(bseeds));
    be.emplace("threads", cfg.bench.threads);
    root.emplace("bench", std::move(be));

    return root;
}

inline std::string config_to_string(const RunConfig& cfg) {
    return detail::toml::serialize(config_to_toml(cfg));
}

// Canonical serialization hashed, so configs differing only in formatting or
// key order share a hash.
inline std::string config_hash(const RunConfig& cfg) {
    return detail::sha256_hex(config_to_string(cfg));
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return config_from_toml(detail::toml::parse(buf.str()));
    } catch (const detail::toml::TomlError& e) {
        throw PipelineError(path.string() + ": " + e.what());
    }
}

inline void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw PipelineError("cannot write config file " + path.string());
    out << config_to_string(cfg);
}

}  // namespace laga::pipeline
