#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "laga/core/graph.hpp"
#include "laga/detect/kmeans.hpp"
#include "laga/eval/nmi.hpp"
#include "laga/learn/encoder.hpp"
#include "laga/learn/structural.hpp"

namespace laga::eval {

struct DownstreamConfig {
    std::vector<std::uint64_t> seeds = {1, 2, 3};  // classification re-runs
    int feature_dim = 256;
    int hidden = 32;
    double learning_rate = 0.05;
    int epochs = 120;
    int kmeans_restarts = 8;
    std::uint64_t cluster_seed = 0;
};

// Supervised node classification: a fresh two-layer graph-convolution
// encoder trained on the visible train labels, scored on ground-truth test
// labels, averaged over the configured seeds.
inline double downstream_classification(const TextAttributedGraph& g,
                                        const Eigen::MatrixXd& features,
                                        const DownstreamConfig& cfg) {
    if (cfg.seeds.empty()) throw EvalError("downstream classification: no seeds configured");
    std::vector<int> test_nodes;
    for (int v = 0; v < g.n(); ++v)
        if (g.node(v).split == Split::test && g.node(v).label) test_nodes.push_back(v);
    if (test_nodes.empty())
        throw EvalError("downstream classification: no labeled test nodes");

    learn::TrainOptions opt;
    opt.hidden = cfg.hidden;
    opt.learning_rate = cfg.learning_rate;
    opt.epochs = cfg.epochs;
    opt.weights.alpha = 0.0;
    opt.weights.beta = 0.0;
    opt.weights.gamma = 1.0;

    const Eigen::MatrixXd no_hsem;
    double total = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
        opt.seed = seed;
        const auto result = learn::train_structural(g, features, no_hsem, opt);
        int correct = 0;
        for (int v : test_nodes) {
            Eigen::Index pred = 0;
            result.logits.row(v).maxCoeff(&pred);
            if (static_cast<int>(pred) == *g.node(v).label) ++correct;
        }
        total += static_cast<double>(correct) / static_cast<double>(test_nodes.size());
    }
    return total / static_cast<double>(cfg.seeds.size());
}

inline double downstream_classification(const TextAttributedGraph& g,
                                        const DownstreamConfig& cfg) {
    std::vector<std::string> texts;
    texts.reserve(g.n());
    for (int v = 0; v < g.n(); ++v) texts.push_back(g.node(v).text);
    return downstream_classification(g, learn::encode_features(texts, cfg.feature_dim).rows,
                                     cfg);
}

// Unsupervised check: k-means over the learned structural embeddings with
// k = number of classes, scored by NMI against every node that carries a
// ground-truth label.
inline double downstream_clustering(const TextAttributedGraph& g,
                                    const Eigen::MatrixXd& embeddings,
                                    const DownstreamConfig& cfg) {
    const int k = g.num_classes();
    if (k < 2) throw EvalError("downstream clustering: needs at least two classes");
    if (embeddings.rows() != g.n())
        throw EvalError("downstream clustering: embeddings do not cover the graph");

    const auto km = detect::kmeans_best_of(
        embeddings, k, detail::RngStream(cfg.cluster_seed).derive("eval.kmeans"),
        cfg.kmeans_restarts);

    std::vector<int> truth, assigned;
    for (int v = 0; v < g.n(); ++v) {
        if (!g.node(v).label) continue;
        truth.push_back(*g.node(v).label);
        assigned.push_back(km.assignment[v]);
    }
    if (truth.empty()) throw EvalError("downstream clustering: no ground-truth labels");
    return nmi(truth, assigned);
}

}  // namespace laga::eval
