#pragma once

#include <cstdint>
#include <optional>

namespace laga::detect {

struct DetectionConfig {
    // Text quality.
    int tau_sparse_tokens = 5;          // token count below which a text is sparse
    double tau_noise = 0.3;             // error-rate threshold
    std::optional<double> tau_informativeness;  // explicit threshold; unset -> corpus percentile
    double informativeness_percentile = 0.10;

    // Community structure. Reference values compare per-community statistics
    // against what a healthy community should exhibit.
    double mean_degree_ref = 2.0;      // sparse if community mean degree below this
    double density_ref = 0.05;         // sparse if internal density below this
    double jaccard_ref = 0.05;         // noisy if mean edge Jaccard below this
    double entropy_ref = 1.0;          // noisy if SE > entropy_ref * ln|C|; 1.0 disables
    double gini_ref = 0.6;             // imbalanced if global degree Gini above this

    // Label quality.
    double tau_consistency = 0.7;      // fused-confidence acceptance threshold
    int kmeans_max_k = 10;
    int kmeans_restarts = 3;
    std::uint64_t seed = 0;
};

}  // namespace laga::detect
