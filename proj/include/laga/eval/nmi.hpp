#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace laga::eval {

class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Normalized mutual information with arithmetic-mean normalization,
// 2 I(A;B) / (H(A) + H(B)). Entropies are computed with the same term
// structure as the diagonal of the mutual information, so two identical
// partitions yield exactly 1.0 in floating point, not merely close to it.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw EvalError("nmi: partitions must cover the same nodes");
    if (a.empty()) throw EvalError("nmi: partitions are empty");

    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> row, col;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        row[a[i]] += 1.0;
        col[b[i]] += 1.0;
    }
    const double n = static_cast<double>(a.size());

    double info = 0.0;
    for (const auto& [key, count] : cells)
        info += (count / n) * std::log((n * count) / (row.at(key.first) * col.at(key.second)));
    double ha = 0.0, hb = 0.0;
    for (const auto& [label, count] : row)
        ha += (count / n) * std::log((n * count) / (count * count));
    for (const auto& [label, count] : col)
        hb += (count / n) * std::log((n * count) / (count * count));

    const double denom = ha + hb;
    if (denom == 0.0) return 1.0;  // both partitions trivial, hence identical
    return std::clamp(2.0 * info / denom, 0.0, 1.0);
}

}  // namespace laga::eval
