// Command-line front end for the graph data-quality toolkit. Subcommands
// mirror the pipeline stages; `run` chains them and `bench` sweeps a
// degradation grid.

#include "laga/llm/client.hpp"  // must precede Eigen-bearing headers

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "laga/core/graph_io.hpp"
#include "laga/detect/report.hpp"
#include "laga/learn/state.hpp"
#include "laga/llm/adapters.hpp"
#include "laga/perturb/scenario.hpp"
#include "laga/pipeline/bench.hpp"
#include "laga/pipeline/config.hpp"
#include "laga/pipeline/loop.hpp"

namespace fs = std::filesystem;

namespace {

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path fresh_dir(const fs::path& base, const std::string& stem) {
    fs::path dir = base / stem;
    for (int k = 2; fs::exists(dir); ++k) dir = base / (stem + "-" + std::to_string(k));
    return dir;
}

nlohmann::json read_json(const fs::path& path) {
    return nlohmann::json::parse(laga::read_file(path));
}

std::shared_ptr<laga::llm::LlmClient> make_client(const laga::pipeline::LlmSettings& s) {
    laga::llm::ClientConfig cfg = laga::llm::ClientConfig::from_env();
    cfg.cache_dir = s.cache_dir;
    cfg.timeout_seconds = s.timeout_seconds;
    cfg.max_in_flight = s.max_in_flight;
    cfg.schema_retries = s.schema_retries;
    cfg.max_tokens = s.max_tokens;
    return std::make_shared<laga::llm::LlmClient>(cfg);
}

int cmd_perturb(const std::string& kind, double ratio, std::uint64_t seed,
                const std::string& in, const std::string& out, const std::string& log_path,
                bool invert) {
    const auto g = laga::load_graph(in);
    if (invert) {
        if (log_path.empty()) throw std::runtime_error("--invert needs --log");
        const auto log = laga::perturb::PerturbationLog::from_json(read_json(log_path));
        laga::save_graph(laga::perturb::apply_inverse(g, log), out);
        std::cout << "restored " << laga::perturb::to_string(log.kind) << " -> " << out << "\n";
        return 0;
    }
    laga::perturb::ScenarioSpec spec;
    spec.kind = laga::perturb::scenario_from_string(kind);
    spec.ratio = ratio;
    spec.seed = seed;
    const auto result = laga::perturb::apply_scenario(g, spec);
    laga::save_graph(result.graph, out);
    if (!log_path.empty())
        laga::write_file(log_path, result.log.to_json().dump(2) + "\n");
    std::cout << kind << " ratio=" << ratio << " affected=" << result.log.affected_count()
              << " -> " << out << "\n";
    return 0;
}

int cmd_detect(const std::string& in, const std::string& out, int dim, std::uint64_t seed) {
    const auto g = laga::load_graph(in);
    const auto x = laga::learn::encode_graph_features(g, dim);
    laga::detect::DetectionConfig dcfg;
    dcfg.seed = seed;
    const auto report = laga::detect::detect_graph(g, x.rows, dcfg);
    laga::write_file(out, report.to_json().dump(2) + "\n");
    std::cout << "report -> " << out << "\n";
    return 0;
}

int cmd_plan(const std::string& report_path, const std::string& mode, const std::string& out,
             double budget, double lambda, double eta) {
    const auto report = laga::detect::DetectionReport::from_json(read_json(report_path));
    laga::plan::PlanConfig pcfg;
    pcfg.budget = budget;
    pcfg.lambda = lambda;
    pcfg.eta = eta;
    laga::plan::PlanReport plan;
    if (mode == "llm") {
        const auto client = make_client(laga::pipeline::LlmSettings{});
        plan = laga::llm::make_plan_llm(report, pcfg, *client);
    } else if (mode == "rules") {
        plan = laga::plan::make_plan(report, pcfg);
    } else {
        throw std::runtime_error("--mode must be rules or llm");
    }
    laga::write_file(out, laga::plan::to_json(plan).dump(2) + "\n");
    std::cout << "plan (" << plan.selection.chosen.size() << " actions) -> " << out << "\n";
    return 0;
}

int cmd_optimize(const std::string& in, const std::string& plan_path,
                 const std::string& state_path, const std::string& out,
                 const std::string& log_path, std::uint64_t seed) {
    const auto g = laga::load_graph(in);
    const auto plan = laga::plan::plan_from_json(read_json(plan_path));
    const auto state = laga::learn::load_state(state_path);

    // Detection and augmentation are recomputed here so the subcommand stays
    // self-contained; `run` wires the exact in-loop artifacts instead.
    const auto x = laga::learn::encode_graph_features(g, state.feature_dim);
    laga::detect::DetectionConfig dcfg;
    dcfg.seed = seed;
    const auto report = laga::detect::detect_graph(g, x.rows, dcfg);
    const auto diag = laga::detect::compute_label_diagnostics(g, x.rows, dcfg);
    std::vector<std::optional<int>> pseudo(g.n());
    for (int v = 0; v < g.n(); ++v) pseudo[static_cast<std::size_t>(v)] = diag.cluster[v].label;
    const auto aug = laga::learn::augment_texts(g, pseudo);

    laga::act::OptimizeConfig ocfg;
    ocfg.seed = seed;
    const auto result =
        laga::act::apply_program(g, plan, state, aug, report, laga::act::ActProviders{}, ocfg);
    laga::save_graph(result.graph, out);
    if (!log_path.empty()) laga::write_file(log_path, result.log.dump(2) + "\n");
    if (result.aborted)
        std::cout << "aborted after " << result.log["actions"].size() << " actions: "
                  << result.error << "\n";
    std::cout << result.log["actions"].size() << " actions -> " << out << "\n";
    return result.aborted ? 1 : 0;
}

int cmd_evaluate(const std::string& in, const std::string& prev_path, const std::string& out,
                 int iteration) {
    const auto g = laga::load_graph(in);
    std::optional<laga::eval::EvalReport> prev;
    if (!prev_path.empty()) prev = laga::eval::eval_from_json(read_json(prev_path));
    if (iteration <= 0) iteration = prev ? prev->iteration + 1 : 1;
    const laga::eval::EvalConfig ecfg;
    const laga::detect::DetectionConfig dcfg;
    const auto report = laga::eval::evaluate_graph(g, nullptr, prev, iteration, ecfg, dcfg);
    laga::write_file(out, laga::eval::to_json(report).dump(2) + "\n");
    std::cout << "q=" << report.q << " delta=" << (report.delta ? "true" : "false")
              << " stop=" << (laga::eval::should_stop(report, prev, ecfg) ? "true" : "false")
              << " -> " << out << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    const auto cfg = laga::pipeline::load_run_config(config_path);
    fs::path dir = out_override.empty()
                       ? fresh_dir(cfg.paths.output, cfg.paths.name + "-" + timestamp_now())
                       : fs::path(out_override);
    const auto outcome = laga::pipeline::run_loop(cfg, dir);
    if (outcome.failed) {
        std::cerr << "run failed: " << outcome.error << "\npartial record -> "
                  << (dir / "record.json").string() << "\n";
        return 1;
    }
    const auto& last = outcome.record.iterations.back();
    std::cout << "run " << dir.string() << ": " << outcome.record.iterations.size()
              << " iteration(s), q=" << last.q << ", stop=" << outcome.record.stop_reason
              << ", llm_calls=" << outcome.record.llm_calls << "\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_override) {
    const auto cfg = laga::pipeline::load_run_config(config_path);
    fs::path dir = out_override.empty()
                       ? fresh_dir(cfg.paths.output, "bench-" + timestamp_now())
                       : fs::path(out_override);
    const auto base = laga::load_graph(cfg.paths.input);
    std::shared_ptr<laga::llm::LlmClient> client;
    if (cfg.mode == "llm") client = make_client(cfg.llm);
    const auto result = laga::pipeline::run_bench(base, cfg, client);
    fs::create_directories(dir);
    laga::write_file(dir / "bench.csv", result.csv);
    laga::write_file(dir / "summary.csv", result.summary_csv);
    int failed = 0;
    for (const auto& c : result.cells) failed += c.failed ? 1 : 0;
    std::cout << result.cells.size() << " cells (" << failed << " failed) -> " << dir.string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"laga: data-quality toolkit for text-attributed graphs"};
    app.require_subcommand(1);

    auto* perturb = app.add_subcommand("perturb", "apply or invert a degradation scenario");
    std::string p_kind = "TS", p_in, p_out, p_log;
    double p_ratio = 0.0;
    std::uint64_t p_seed = 0;
    bool p_invert = false;
    perturb->add_option("--kind", p_kind, "scenario kind (TS TN TI SS SN SI LS LN LI)");
    perturb->add_option("--ratio", p_ratio, "affected fraction in [0,1]");
    perturb->add_option("--seed", p_seed, "scenario seed");
    perturb->add_option("--in", p_in, "input graph directory")->required();
    perturb->add_option("--out", p_out, "output graph directory")->required();
    perturb->add_option("--log", p_log, "perturbation log path");
    perturb->add_flag("--invert", p_invert, "restore the graph recorded in --log");

    auto* detect = app.add_subcommand("detect", "score the nine quality issues");
    std::string d_in, d_out = "report.json";
    int d_dim = 256;
    std::uint64_t d_seed = 0;
    detect->add_option("--in", d_in, "input graph directory")->required();
    detect->add_option("--out", d_out, "report path");
    detect->add_option("--dim", d_dim, "feature dimension");
    detect->add_option("--seed", d_seed, "detection seed");

    auto* plan = app.add_subcommand("plan", "turn a detection report into an action plan");
    std::string pl_report, pl_mode = "rules", pl_out = "plan.json";
    double pl_budget = 1000.0, pl_lambda = 0.01, pl_eta = 1.0;
    plan->add_option("--report", pl_report, "detection report path")->required();
    plan->add_option("--mode", pl_mode, "rules or llm");
    plan->add_option("--out", pl_out, "plan path");
    plan->add_option("--budget", pl_budget, "cost budget");
    plan->add_option("--lambda", pl_lambda, "cost pressure");
    plan->add_option("--eta", pl_eta, "weight sharpness");

    auto* optimize = app.add_subcommand("optimize", "apply a plan's repair program");
    std::string o_in, o_plan, o_state, o_out, o_log;
    std::uint64_t o_seed = 0;
    optimize->add_option("--in", o_in, "input graph directory")->required();
    optimize->add_option("--plan", o_plan, "plan path")->required();
    optimize->add_option("--state", o_state, "learned state path")->required();
    optimize->add_option("--out", o_out, "output graph directory")->required();
    optimize->add_option("--log", o_log, "change log path");
    optimize->add_option("--seed", o_seed, "operator seed");

    auto* evaluate = app.add_subcommand("evaluate", "score graph quality and downstream accuracy");
    std::string e_in, e_prev, e_out = "eval.json";
    int e_iter = 0;
    evaluate->add_option("--in", e_in, "input graph directory")->required();
    evaluate->add_option("--prev", e_prev, "previous evaluation report");
    evaluate->add_option("--out", e_out, "evaluation report path");
    evaluate->add_option("--iteration", e_iter, "iteration number (default: previous + 1)");

    auto* run = app.add_subcommand("run", "execute the full closed loop from a config");
    std::string r_config, r_out;
    run->add_option("--config", r_config, "run configuration (TOML)")->required();
    run->add_option("--out", r_out, "run directory (default: timestamped)");

    auto* bench = app.add_subcommand("bench", "sweep scenarios x ratios x seeds");
    std::string b_config, b_out;
    bench->add_option("--config", b_config, "run configuration (TOML)")->required();
    bench->add_option("--out", b_out, "output directory (default: timestamped)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (perturb->parsed())
            return cmd_perturb(p_kind, p_ratio, p_seed, p_in, p_out, p_log, p_invert);
        if (detect->parsed()) return cmd_detect(d_in, d_out, d_dim, d_seed);
        if (plan->parsed())
            return cmd_plan(pl_report, pl_mode, pl_out, pl_budget, pl_lambda, pl_eta);
        if (optimize->parsed()) return cmd_optimize(o_in, o_plan, o_state, o_out, o_log, o_seed);
        if (evaluate->parsed()) return cmd_evaluate(e_in, e_prev, e_out, e_iter);
        if (run->parsed()) return cmd_run(r_config, r_out);
        if (bench->parsed()) return cmd_bench(b_config, b_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
