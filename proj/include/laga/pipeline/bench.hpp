#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "laga/perturb/scenario.hpp"
#include "laga/pipeline/loop.hpp"

namespace laga::pipeline {

struct BenchCell {
    perturb::ScenarioKind kind = perturb::ScenarioKind::TS;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    double degraded = 0.0;   // accuracy right after the perturbation
    double optimized = 0.0;  // accuracy after the repair loop
    double delta = 0.0;      // optimized - degraded
    int iterations = 0;
    bool failed = false;
    std::string error;
};

struct BenchResult {
    std::vector<BenchCell> cells;  // sorted by (kind, ratio, seed)
    std::string csv;               // one row per cell
    std::string summary_csv;       // scenario x ratio aggregate over seeds
};

namespace impl {

inline std::string fmt(double v) { return nlohmann::ordered_json(v).dump(); }

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace impl

// Runs the perturb -> repair -> compare grid over the base graph. Cells are
// independent and carry content-derived seeds, so the worker count never
// changes the numbers. A failing cell is recorded and skipped, not fatal.
inline BenchResult run_bench(const TextAttributedGraph& base, const RunConfig& cfg,
                             const std::shared_ptr<llm::LlmClient>& client = nullptr) {
    validate(cfg);
    BenchResult out;
    for (perturb::ScenarioKind kind : cfg.bench.kinds)
        for (double ratio : cfg.bench.ratios)
            for (std::uint64_t seed : cfg.bench.seeds) {
                BenchCell cell;
                cell.kind = kind;
                cell.ratio = ratio;
                cell.seed = seed;
                out.cells.push_back(cell);
            }
    std::sort(out.cells.begin(), out.cells.end(), [](const BenchCell& a, const BenchCell& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        if (a.ratio != b.ratio) return a.ratio < b.ratio;
        return a.seed < b.seed;
    });

    const auto work = [&](BenchCell& cell) {
        try {
            perturb::ScenarioSpec spec;
            spec.kind = cell.kind;
            spec.ratio = cell.ratio;
            spec.seed = cell.seed;
            const auto degraded = perturb::apply_scenario(base, spec);
            cell.degraded = eval::downstream_classification(degraded.graph, cfg.eval.downstream);

            RunConfig cell_cfg = cfg;
            cell_cfg.seed = detail::RngStream(cfg.seed)
                                .derive(perturb::to_string(cell.kind))
                                .derive("ratio", static_cast<std::uint64_t>(
                                                     std::llround(cell.ratio * 1e9)))
                                .derive("seed", cell.seed)
                                .next_u64();
            const auto repaired = optimize_in_memory(degraded.graph, cell_cfg,
                                                     cfg.mode == "llm" ? client : nullptr);
            cell.iterations = static_cast<int>(repaired.evals.size());
            cell.optimized = eval::downstream_classification(repaired.graph, cfg.eval.downstream);
            cell.delta = cell.optimized - cell.degraded;
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
    };

    const int workers =
        std::max(1, std::min<int>(cfg.bench.threads, static_cast<int>(out.cells.size())));
    if (workers == 1) {
        for (auto& cell : out.cells) work(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= out.cells.size()) return;
                    work(out.cells[i]);
                }
            });
        for (auto& t : pool) t.join();
    }

    out.csv = "scenario,ratio,seed,degraded,optimized,delta,iterations,error\n";
    for (const auto& c : out.cells) {
        out.csv += std::string(perturb::to_string(c.kind)) + "," + impl::fmt(c.ratio) + "," +
                   std::to_string(c.seed) + ",";
        if (c.failed)
            out.csv += ",,,," + impl::csv_quote(c.error) + "\n";
        else
            out.csv += impl::fmt(c.degraded) + "," + impl::fmt(c.optimized) + "," +
                       impl::fmt(c.delta) + "," + std::to_string(c.iterations) + ",\n";
    }

    out.summary_csv =
        "scenario,ratio,cells,failed,degraded_mean,degraded_std,optimized_mean,"
        "optimized_std,delta_mean,delta_std\n";
    for (std::size_t i = 0; i < out.cells.size();) {
        std::size_t j = i;
        while (j < out.cells.size() && out.cells[j].kind == out.cells[i].kind &&
               out.cells[j].ratio == out.cells[i].ratio)
            ++j;
        std::vector<double> deg, opt, del;
        int failed = 0;
        for (std::size_t k = i; k < j; ++k) {
            if (out.cells[k].failed) {
                ++failed;
                continue;
            }
            deg.push_back(out.cells[k].degraded);
            opt.push_back(out.cells[k].optimized);
            del.push_back(out.cells[k].delta);
        }
        const auto mean = [](const std::vector<double>& v) {
            if (v.empty()) return 0.0;
            double s = 0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        const auto stdev = [&](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            const double m = mean(v);
            double s = 0;
            for (double x : v) s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        };
        out.summary_csv += std::string(perturb::to_string(out.cells[i].kind)) + "," +
                           impl::fmt(out.cells[i].ratio) + "," + std::to_string(j - i) + "," +
                           std::to_string(failed) + "," + impl::fmt(mean(deg)) + "," +
                           impl::fmt(stdev(deg)) + "," + impl::fmt(mean(opt)) + "," +
                           impl::fmt(stdev(opt)) + "," + impl::fmt(mean(del)) + "," +
                           impl::fmt(stdev(del)) + "\n";
        i = j;
    }
    return out;
}

}  // namespace laga::pipeline
