#pragma once

#include <array>
#include <cmath>
#include <limits>

namespace laga::plan {

struct LossWeights {
    double alpha = 1.0 / 3.0;  // semantic objective
    double beta = 1.0 / 3.0;   // structural objective
    double gamma = 1.0 / 3.0;  // label objective
    double eta = 1.0;
    bool from_fallback = false;
};

// softmax(-eta * dimension mean severities): the more degraded a dimension,
// the less its objective is trusted. Always sums to 1.
inline LossWeights loss_weights_from_severity(const std::array<double, 3>& dim_means,
                                              double eta) {
    std::array<double, 3> z{};
    double zmax = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < 3; ++d) {
        z[d] = -eta * dim_means[d];
        zmax = std::max(zmax, z[d]);
    }
    double denom = 0.0;
    for (int d = 0; d < 3; ++d) {
        z[d] = std::exp(z[d] - zmax);
        denom += z[d];
    }
    LossWeights w;
    w.alpha = z[0] / denom;
    w.beta = z[1] / denom;
    w.gamma = z[2] / denom;
    w.eta = eta;
    return w;
}

// Clamp-and-renormalize for externally supplied weights; returns false when
// the triple is unusable (non-finite or non-positive mass).
inline bool project_weights(double alpha, double beta, double gamma, LossWeights& out) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) return false;
    alpha = std::max(0.0, alpha);
    beta = std::max(0.0, beta);
    gamma = std::max(0.0, gamma);
    const double total = alpha + beta + gamma;
    if (total <= 0.0) return false;
    out.alpha = alpha / total;
    out.beta = beta / total;
    out.gamma = gamma / total;
    return true;
}

}  // namespace laga::plan
