#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "laga/core/issue.hpp"
#include "laga/detect/report.hpp"

namespace laga::plan {

// Severity levels: 0 none, 1 mild, 2 moderate, 3 severe.
using SeverityVector = std::array<int, 9>;

struct SeverityBands {
    // stat <= t1 -> 0, <= t2 -> 1, <= t3 -> 2, otherwise 3.
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

struct SeverityRules {
    std::array<SeverityBands, 9> bands;

    SeverityRules() {
        set(QualityIssue::TS, {0.05, 0.15, 0.35});
        set(QualityIssue::TN, {0.05, 0.15, 0.35});
        set(QualityIssue::TI, {0.20, 0.30, 0.50});
        set(QualityIssue::SS, {0.00, 0.25, 0.50});
        set(QualityIssue::SN, {0.00, 0.25, 0.50});
        set(QualityIssue::SI, {0.25, 0.40, 0.55});
        set(QualityIssue::LS, {0.02, 0.10, 0.25});
        set(QualityIssue::LN, {0.02, 0.08, 0.20});
        set(QualityIssue::LI, {0.20, 0.35, 0.60});
    }

    void set(QualityIssue i, SeverityBands b) { bands[issue_index(i)] = b; }
    const SeverityBands& of(QualityIssue i) const { return bands[issue_index(i)]; }
};

// One scalar statistic per issue, extracted from a detection report. Each is
// oriented so that larger means worse.
inline std::array<double, 9> issue_statistics(const detect::DetectionReport& r) {
    std::array<double, 9> s{};
    s[issue_index(QualityIssue::TS)] = r.sparse_text_fraction;
    s[issue_index(QualityIssue::TN)] = r.noisy_text_fraction;
    s[issue_index(QualityIssue::TI)] = r.cv_token_count;
    s[issue_index(QualityIssue::SS)] = r.sparse_community_fraction;
    s[issue_index(QualityIssue::SN)] = r.noisy_community_fraction;
    s[issue_index(QualityIssue::SI)] = r.degree_gini;
    s[issue_index(QualityIssue::LS)] = r.missing_label_fraction;
    s[issue_index(QualityIssue::LN)] = r.noisy_label_fraction;
    s[issue_index(QualityIssue::LI)] = 1.0 - r.label_imbalance_ratio;
    return s;
}

inline int band_level(double stat, const SeverityBands& b) {
    if (stat <= b.t1) return 0;
    if (stat <= b.t2) return 1;
    if (stat <= b.t3) return 2;
    return 3;
}

inline SeverityVector severities_from_stats(const std::array<double, 9>& stats,
                                            const SeverityRules& rules) {
    SeverityVector s{};
    for (QualityIssue i : all_issues())
        s[issue_index(i)] = band_level(stats[issue_index(i)], rules.of(i));
    return s;
}

// Priority order: descending relevance * severity; ties prefer label issues
// over structure over text, then sparsity < noise < imbalance within a
// dimension.
inline std::array<QualityIssue, 9> priority_order(const SeverityVector& s,
                                                  const std::array<double, 9>& relevance) {
    std::array<QualityIssue, 9> order = all_issues();
    auto tie_rank = [](QualityIssue i) {
        int dim = 0;
        switch (dimension_of(i)) {
            case QualityDimension::label: dim = 0; break;
            case QualityDimension::structure: dim = 1; break;
            case QualityDimension::text: dim = 2; break;
        }
        return dim * 3 + issue_index(i) % 3;
    };
    std::stable_sort(order.begin(), order.end(), [&](QualityIssue a, QualityIssue b) {
        const double wa = relevance[issue_index(a)] * s[issue_index(a)];
        const double wb = relevance[issue_index(b)] * s[issue_index(b)];
        if (wa != wb) return wa > wb;
        return tie_rank(a) < tie_rank(b);
    });
    return order;
}

struct SeverityAssessment {
    std::array<double, 9> stats{};
    SeverityVector severities{};
    std::array<QualityIssue, 9> priority = all_issues();
    std::array<double, 3> dimension_means{};  // text, structure, label
    bool from_fallback = false;               // llm mode fell back to rules

    bool any_at_least(int level) const {
        for (int s : severities)
            if (s >= level) return true;
        return false;
    }
};

inline std::array<double, 3> dimension_means(const SeverityVector& s) {
    std::array<double, 3> m{};
    std::array<int, 3> counts{};
    for (QualityIssue i : all_issues()) {
        const int d = static_cast<int>(dimension_of(i));
        m[d] += s[issue_index(i)];
        counts[d] += 1;
    }
    for (int d = 0; d < 3; ++d) m[d] /= std::max(1, counts[d]);
    return m;
}

inline SeverityAssessment assess_severity(const detect::DetectionReport& report,
                                          const SeverityRules& rules,
                                          const std::array<double, 9>& relevance) {
    SeverityAssessment a;
    a.stats = issue_statistics(report);
    a.severities = severities_from_stats(a.stats, rules);
    a.priority = priority_order(a.severities, relevance);
    a.dimension_means = dimension_means(a.severities);
    return a;
}

}  // namespace laga::plan
