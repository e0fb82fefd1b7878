#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "laga/core/graph.hpp"
#include "laga/detail/rng.hpp"
#include "laga/plan/weights.hpp"

namespace laga::learn {

struct TrainOptions {
    int hidden = 64;
    double learning_rate = 0.05;
    int epochs = 200;
    double tau = 0.5;             // contrastive temperature
    int negatives_per_node = 5;
    int max_pair_samples = 2000;  // cap on sampled edges for pair losses
    std::uint64_t seed = 0;
    plan::LossWeights weights;
};

class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace impl {

inline Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, detail::RngStream& rng) {
    Eigen::MatrixXd m(rows, cols);
    const double scale = std::sqrt(1.0 / static_cast<double>(rows));
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.next_normal();
    return m;
}

inline void check_finite(double loss, int epoch, const char* which) {
    if (!std::isfinite(loss))
        throw TrainingError(std::string(which) + " training diverged at epoch " +
                            std::to_string(epoch));
}

}  // namespace impl

// Uniform non-neighbor draws, excluding self and duplicates.
inline std::vector<std::vector<int>> sample_negatives(const TextAttributedGraph& g, int per_node,
                                                      detail::RngStream rng) {
    std::vector<std::vector<int>> out(g.n());
    for (int i = 0; i < g.n(); ++i) {
        const int max_available = g.n() - 1 - g.degree(i);
        const int want = std::min(per_node, max_available);
        std::set<int> chosen;
        std::size_t attempts = 0;
        const std::size_t budget = 200 * static_cast<std::size_t>(want + 1);
        while (static_cast<int>(chosen.size()) < want && attempts < budget) {
            ++attempts;
            const int j = static_cast<int>(rng.below(g.n()));
            if (j == i || g.has_edge(i, j) || chosen.count(j)) continue;
            chosen.insert(j);
        }
        out[i].assign(chosen.begin(), chosen.end());
    }
    return out;
}

struct PairFrame {
    std::vector<std::pair<int, int>> positives;
    std::vector<std::pair<int, int>> negatives;
};

// Sampled edges plus an equal count of non-edges; the frame is drawn once per
// training run.
inline PairFrame sample_pair_frame(const TextAttributedGraph& g, int max_samples,
                                   detail::RngStream rng) {
    PairFrame frame;
    if (g.m() <= max_samples) {
        frame.positives = g.edges();
    } else {
        for (auto idx : rng.sample_indices(g.m(), max_samples))
            frame.positives.push_back(g.edges()[idx]);
        std::sort(frame.positives.begin(), frame.positives.end());
    }
    const std::size_t want = frame.positives.size();
    std::set<std::pair<int, int>> chosen;
    std::size_t attempts = 0;
    const std::size_t budget = 400 * (want + 1);
    while (chosen.size() < want && attempts < budget && g.n() >= 2) {
        ++attempts;
        int u = static_cast<int>(rng.below(g.n()));
        int v = static_cast<int>(rng.below(g.n()));
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (g.has_edge(u, v) || chosen.count({u, v})) continue;
        chosen.insert({u, v});
    }
    frame.negatives.assign(chosen.begin(), chosen.end());
    return frame;
}

// Symmetric renormalized adjacency with self loops.
inline Eigen::MatrixXd normalized_adjacency(const TextAttributedGraph& g) {
    const int n = g.n();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [u, v] : g.edges()) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    for (int i = 0; i < n; ++i) a(i, i) += 1.0;
    Eigen::VectorXd d = a.rowwise().sum();
    Eigen::VectorXd dinv = d.array().rsqrt();
    return dinv.asDiagonal() * a * dinv.asDiagonal();
}

}  // namespace laga::learn
