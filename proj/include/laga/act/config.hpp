#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace laga::act {

class ActError : public std::runtime_error {
public:
    explicit ActError(const std::string& msg) : std::runtime_error(msg) {}
};

// Symmetric edge-probability oracle over node ids; implementations wrap the
// learned link predictor.
using EdgeProbFn = std::function<double(int, int)>;

struct OptimizeConfig {
    int k_edge = 5;              // degree ceiling and per-node addition bound
    double tau_edge = 0.5;       // edge-probability threshold
    double tau_lape = 0.7;       // label-confidence threshold
    double lambda_label = 0.5;   // balance inside the confidence formula
    double r_gen = 0.3;          // generation ratio against the mean class size
    std::uint64_t seed = 0;      // drives context sampling for generation
};

inline void validate(const OptimizeConfig& cfg) {
    if (cfg.k_edge < 1) throw ActError("k_edge must be positive");
    if (cfg.tau_edge < 0.0 || cfg.tau_edge > 1.0) throw ActError("tau_edge out of range");
    if (cfg.tau_lape < 0.0 || cfg.tau_lape > 1.0) throw ActError("tau_lape out of range");
    if (cfg.lambda_label < 0.0 || cfg.lambda_label > 1.0)
        throw ActError("lambda_label must lie in [0,1]");
    if (cfg.r_gen < 0.0) throw ActError("r_gen must be non-negative");
}

}  // namespace laga::act
