#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detect/config.hpp"
#include "laga/detect/kmeans.hpp"

namespace laga::detect {

struct LabelPrediction {
    std::optional<int> label;
    double confidence = 0.0;
};

struct LabelDiagnostics {
    std::vector<LabelPrediction> vote;      // neighborhood majority over visible labels
    std::vector<LabelPrediction> cluster;   // k-means cluster majority class
    std::vector<LabelPrediction> fused;     // winner of the two above the gate
    std::vector<bool> suspected_noisy;      // visible label contradicts fused prediction
    std::vector<bool> missing;              // train/unlabeled node without a visible label
    std::vector<double> class_distribution; // visible-label shares, sums to 1
    int visible_labeled = 0;
    double imbalance_ratio = 0.0;           // min class share / max class share
};

namespace impl {

inline LabelPrediction majority_vote(const TextAttributedGraph& g, int v) {
    std::vector<int> counts(g.num_classes(), 0);
    int total = 0;
    for (int u : g.neighbors(v)) {
        if (auto y = g.visible_label(u)) {
            counts[*y] += 1;
            total += 1;
        }
    }
    LabelPrediction p;
    if (total == 0) return p;
    int best = 0;
    for (int c = 1; c < g.num_classes(); ++c)
        if (counts[c] > counts[best]) best = c;
    p.label = best;
    p.confidence = static_cast<double>(counts[best]) / total;
    return p;
}

}  // namespace impl

// Two weak labelers cross-checked: neighborhood majority vote over visible
// labels, and feature-space k-means with per-cluster majority class. The
// fused prediction takes the more confident tool, gated by tau_consistency.
inline LabelDiagnostics compute_label_diagnostics(const TextAttributedGraph& g,
                                                  const Eigen::MatrixXd& features,
                                                  const DetectionConfig& cfg) {
    if (features.rows() != g.n())
        throw GraphError("label diagnostics: feature row count mismatch");
    LabelDiagnostics out;
    out.vote.resize(g.n());
    out.cluster.resize(g.n());
    out.fused.resize(g.n());
    out.suspected_noisy.assign(g.n(), false);
    out.missing.assign(g.n(), false);

    for (int v = 0; v < g.n(); ++v) out.vote[v] = impl::majority_vote(g, v);

    auto rng = detail::RngStream(cfg.seed).derive("detect.kmeans");
    KmeansResult km;
    if (g.num_classes() >= 2) {
        km = kmeans_best_of(features, g.num_classes(), rng, cfg.kmeans_restarts);
    } else {
        km = adaptive_kmeans(features, std::min(cfg.kmeans_max_k, g.n()), rng,
                             cfg.kmeans_restarts);
    }
    std::vector<std::vector<int>> cluster_counts(km.k, std::vector<int>(g.num_classes(), 0));
    std::vector<int> cluster_labeled(km.k, 0);
    for (int v = 0; v < g.n(); ++v) {
        if (auto y = g.visible_label(v)) {
            cluster_counts[km.assignment[v]][*y] += 1;
            cluster_labeled[km.assignment[v]] += 1;
        }
    }
    std::vector<LabelPrediction> cluster_pred(km.k);
    for (int c = 0; c < km.k; ++c) {
        if (cluster_labeled[c] == 0) continue;
        int best = 0;
        for (int y = 1; y < g.num_classes(); ++y)
            if (cluster_counts[c][y] > cluster_counts[c][best]) best = y;
        cluster_pred[c].label = best;
        cluster_pred[c].confidence =
            static_cast<double>(cluster_counts[c][best]) / cluster_labeled[c];
    }
    for (int v = 0; v < g.n(); ++v) out.cluster[v] = cluster_pred[km.assignment[v]];

    for (int v = 0; v < g.n(); ++v) {
        const auto& a = out.vote[v];
        const auto& b = out.cluster[v];
        const double best = std::max(a.label ? a.confidence : -1.0, b.label ? b.confidence : -1.0);
        if (best >= cfg.tau_consistency) {
            // Ties go to the vote-based tool.
            if (a.label && a.confidence >= best) {
                out.fused[v] = a;
            } else {
                out.fused[v] = b;
            }
        }
    }

    for (int v = 0; v < g.n(); ++v) {
        const auto visible = g.visible_label(v);
        if (visible) {
            if (out.fused[v].label && *out.fused[v].label != *visible)
                out.suspected_noisy[v] = true;
        } else if (g.node(v).split == Split::train || g.node(v).split == Split::unlabeled) {
            out.missing[v] = true;
        }
    }

    out.class_distribution.assign(g.num_classes(), 0.0);
    for (int v = 0; v < g.n(); ++v)
        if (auto y = g.visible_label(v)) {
            out.class_distribution[*y] += 1.0;
            out.visible_labeled += 1;
        }
    if (out.visible_labeled > 0) {
        for (double& p : out.class_distribution) p /= out.visible_labeled;
        double lo = 1.0, hi = 0.0;
        for (double p : out.class_distribution) {
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        out.imbalance_ratio = hi > 0 ? lo / hi : 0.0;
    }
    return out;
}

}  // namespace laga::detect
