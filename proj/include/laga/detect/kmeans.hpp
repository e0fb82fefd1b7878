#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "laga/detail/rng.hpp"

namespace laga::detect {

struct KmeansResult {
    std::vector<int> assignment;
    Eigen::MatrixXd centers;
    double inertia = 0.0;
    int k = 0;
};

namespace impl {

inline double sq_dist(const Eigen::MatrixXd& x, int i, const Eigen::MatrixXd& centers, int c) {
    return (x.row(i) - centers.row(c)).squaredNorm();
}

}  // namespace impl

// Lloyd's algorithm with deterministic farthest-point seeding: the first
// center is drawn from the stream, each further center is the point with the
// largest distance to its nearest chosen center (ties: lowest index). Empty
// clusters are reseeded to the point farthest from its current center.
inline KmeansResult kmeans(const Eigen::MatrixXd& x, int k, detail::RngStream rng,
                           int max_iter = 100) {
    const int n = static_cast<int>(x.rows());
    if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
    if (n == 0) throw std::invalid_argument("kmeans: empty input");
    k = std::min(k, n);

    Eigen::MatrixXd centers(k, x.cols());
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    const int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = x.row(first);
    for (int c = 1; c < k; ++c) {
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], impl::sq_dist(x, i, centers, c - 1));
            if (nearest[i] > far_d) {
                far_d = nearest[i];
                far = i;
            }
        }
        centers.row(c) = x.row(far);
    }

    std::vector<int> assignment(n, 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = impl::sq_dist(x, i, centers, 0);
            for (int c = 1; c < k; ++c) {
                const double d = impl::sq_dist(x, i, centers, c);
                if (d < best_d - 1e-15) {
                    best_d = d;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(assignment[i]) += x.row(i);
            counts[assignment[i]] += 1;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers.row(c) = sums.row(c) / counts[c];
            } else {
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = impl::sq_dist(x, i, centers, assignment[i]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers.row(c) = x.row(far);
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
    }

    KmeansResult out;
    out.assignment = std::move(assignment);
    out.centers = std::move(centers);
    out.k = k;
    for (int i = 0; i < n; ++i) out.inertia += impl::sq_dist(x, i, out.centers, out.assignment[i]);
    return out;
}

inline KmeansResult kmeans_best_of(const Eigen::MatrixXd& x, int k, detail::RngStream rng,
                                   int restarts, int max_iter = 100) {
    KmeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, restarts); ++r) {
        auto res = kmeans(x, k, rng.derive("restart", static_cast<std::uint64_t>(r)), max_iter);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    return best;
}

// Mean silhouette coefficient; O(n^2), intended for desk-scale inputs.
inline double mean_silhouette(const Eigen::MatrixXd& x, const std::vector<int>& assignment, int k) {
    const int n = static_cast<int>(x.rows());
    std::vector<int> counts(k, 0);
    for (int c : assignment) counts[c] += 1;
    double total = 0.0;
    int valid = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> mean_dist(k, 0.0);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[assignment[j]] += (x.row(i) - x.row(j)).norm();
        }
        const int own = assignment[i];
        if (counts[own] <= 1) continue;  // silhouette undefined for singletons
        double a = mean_dist[own] / (counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, mean_dist[c] / counts[c]);
        }
        if (!std::isfinite(b)) continue;
        const double denom = std::max(a, b);
        total += denom > 0 ? (b - a) / denom : 0.0;
        valid += 1;
    }
    return valid > 0 ? total / valid : 0.0;
}

// Selects k in [2, max_k] by mean silhouette (ties: smaller k).
inline KmeansResult adaptive_kmeans(const Eigen::MatrixXd& x, int max_k, detail::RngStream rng,
                                    int restarts = 3) {
    const int n = static_cast<int>(x.rows());
    max_k = std::min(max_k, n);
    if (max_k < 2) return kmeans_best_of(x, 1, rng.derive("k", 1), restarts);
    KmeansResult best;
    double best_sil = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= max_k; ++k) {
        auto res = kmeans_best_of(x, k, rng.derive("k", static_cast<std::uint64_t>(k)), restarts);
        const double sil = mean_silhouette(x, res.assignment, k);
        if (sil > best_sil + 1e-12) {
            best_sil = sil;
            best = std::move(res);
        }
    }
    return best;
}

}  // namespace laga::detect
