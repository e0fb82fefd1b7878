#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "laga/act/config.hpp"
#include "laga/act/structure_opt.hpp"
#include "laga/core/graph.hpp"
#include "laga/learn/state.hpp"

namespace laga::act {

// Confidence in the top predicted class: the top probability and the gap to
// the runner-up, balanced in log space. A vanishing gap yields zero.
inline double label_confidence(double p_max, double p_second, double lambda) {
    const double gap = p_max - p_second;
    if (gap <= 0.0 || p_max <= 0.0) return 0.0;
    return std::exp(lambda * std::log(p_max) + (1.0 - lambda) * std::log(gap));
}

enum class LabelPath { confidence, vote, skipped };

inline const char* to_string(LabelPath p) {
    switch (p) {
        case LabelPath::confidence: return "confidence";
        case LabelPath::vote: return "vote";
        default: return "skipped";
    }
}

struct LabelEdit {
    int node = 0;
    std::optional<int> before;
    std::optional<int> after;
    LabelPath path = LabelPath::skipped;
    double confidence = 0.0;
    bool split_promoted = false;  // unlabeled-split node pulled into train
};

struct LabelOptResult {
    std::vector<LabelEdit> edits;
    int assigned = 0;
};

// Flagged nodes receive the encoder's top class when its confidence clears
// the bar, otherwise an edge-weighted vote over their reliably labeled
// neighbors (flagged neighbors do not vote: their labels are in question).
// All decisions read the input graph, so ordering cannot matter.
inline LabelOptResult optimize_labels(const TextAttributedGraph& g,
                                      const std::vector<int>& targets,
                                      const learn::LearnedState& state,
                                      const EdgeProbFn& edge_prob, const OptimizeConfig& cfg) {
    validate(cfg);
    if (state.n > g.n()) throw ActError("optimize_labels: state does not match the graph");
    const std::set<int> flagged(targets.begin(), targets.end());

    LabelOptResult out;
    for (int node : flagged) {
        if (node < 0 || node >= g.n()) throw ActError("optimize_labels: target out of range");
        if (node >= state.n) throw ActError("optimize_labels: target has no trained distribution");
        LabelEdit edit;
        edit.node = node;
        edit.before = g.node(node).label;

        const Eigen::VectorXd p = learn::label_distribution(state, node);
        Eigen::Index best = 0;
        p.maxCoeff(&best);
        double second = -1.0;
        for (Eigen::Index c = 0; c < p.size(); ++c)
            if (c != best) second = std::max(second, p(c));
        edit.confidence = label_confidence(p(best), std::max(second, 0.0), cfg.lambda_label);

        if (edit.confidence > cfg.tau_lape) {
            edit.path = LabelPath::confidence;
            edit.after = static_cast<int>(best);
        } else {
            std::vector<double> tally(g.num_classes(), 0.0);
            bool any = false;
            for (int j : g.neighbors(node)) {
                if (flagged.count(j)) continue;
                const auto y = g.visible_label(j);
                if (!y) continue;
                tally[*y] += edge_prob(node, j);
                any = true;
            }
            if (any) {
                edit.path = LabelPath::vote;
                int winner = 0;
                for (int c = 1; c < g.num_classes(); ++c)
                    if (tally[c] > tally[winner]) winner = c;
                edit.after = winner;
            } else {
                edit.path = LabelPath::skipped;
                edit.after = edit.before;
            }
        }
        if (edit.path != LabelPath::skipped) {
            out.assigned += 1;
            edit.split_promoted = !g.visible_label(node).has_value();
        }
        out.edits.push_back(std::move(edit));
    }
    return out;
}

// Applies the edits: assigned labels are written back, and nodes that had no
// visible label join the train split so the new label can supervise.
inline TextAttributedGraph apply_label_edits(const TextAttributedGraph& g,
                                             const LabelOptResult& result) {
    auto nodes = g.copy_nodes();
    for (const auto& edit : result.edits) {
        if (edit.path == LabelPath::skipped) continue;
        nodes[edit.node].label = edit.after;
        if (edit.split_promoted) nodes[edit.node].split = Split::train;
    }
    return g.with_nodes(std::move(nodes));
}

}  // namespace laga::act
