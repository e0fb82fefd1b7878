#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace laga {

// The nine quality issues: {text, structure, label} x {sparsity, noise,
// imbalance}.
enum class QualityIssue { TS, TN, TI, SS, SN, SI, LS, LN, LI };

enum class QualityDimension { text, structure, label };

inline constexpr std::array<QualityIssue, 9> all_issues() {
    return {QualityIssue::TS, QualityIssue::TN, QualityIssue::TI,
            QualityIssue::SS, QualityIssue::SN, QualityIssue::SI,
            QualityIssue::LS, QualityIssue::LN, QualityIssue::LI};
}

inline const char* to_string(QualityIssue i) {
    switch (i) {
        case QualityIssue::TS: return "TS";
        case QualityIssue::TN: return "TN";
        case QualityIssue::TI: return "TI";
        case QualityIssue::SS: return "SS";
        case QualityIssue::SN: return "SN";
        case QualityIssue::SI: return "SI";
        case QualityIssue::LS: return "LS";
        case QualityIssue::LN: return "LN";
        case QualityIssue::LI: return "LI";
    }
    throw std::invalid_argument("invalid quality issue");
}

inline QualityIssue issue_from_string(const std::string& s) {
    for (QualityIssue i : all_issues())
        if (s == to_string(i)) return i;
    throw std::invalid_argument("unknown quality issue '" + s + "'");
}

inline QualityDimension dimension_of(QualityIssue i) {
    switch (i) {
        case QualityIssue::TS:
        case QualityIssue::TN:
        case QualityIssue::TI: return QualityDimension::text;
        case QualityIssue::SS:
        case QualityIssue::SN:
        case QualityIssue::SI: return QualityDimension::structure;
        default: return QualityDimension::label;
    }
}

inline int issue_index(QualityIssue i) { return static_cast<int>(i); }

}  // namespace laga
