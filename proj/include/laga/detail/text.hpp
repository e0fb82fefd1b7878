#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace laga::detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Whitespace-delimited raw tokens.
inline std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

// Lowercase and strip leading/trailing non-alphanumeric characters.
inline std::string normalize_token(std::string_view raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && !is_word_char(raw[b])) ++b;
    while (e > b && !is_word_char(raw[e - 1])) --e;
    std::string out(raw.substr(b, e - b));
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<std::string> normalized_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& raw : split_tokens(text)) {
        std::string norm = normalize_token(raw);
        if (!norm.empty()) out.push_back(std::move(norm));
    }
    return out;
}

// A token is garbage when its interior contains characters outside
// [alphanumeric, '-', '\''] after stripping outer punctuation.
inline bool is_garbage_token(std::string_view raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && !is_word_char(raw[b])) ++b;
    while (e > b && !is_word_char(raw[e - 1])) --e;
    if (b >= e) return true;  // no alphanumeric core at all
    for (std::size_t i = b; i < e; ++i) {
        const char c = raw[i];
        if (!is_word_char(c) && c != '-' && c != '\'') return true;
    }
    return false;
}

struct CorpusStats {
    std::size_t num_docs = 0;
    std::unordered_map<std::string, std::size_t> doc_freq;  // normalized token -> #docs

    bool in_vocabulary(const std::string& norm) const {
        auto it = doc_freq.find(norm);
        return it != doc_freq.end() && it->second >= 2;
    }

    // ln(|T| / (1 + df)); tokens never seen get df = 0.
    double idf(const std::string& norm) const {
        auto it = doc_freq.find(norm);
        const double df = it == doc_freq.end() ? 0.0 : static_cast<double>(it->second);
        return std::log(static_cast<double>(num_docs) / (1.0 + df));
    }
};

template <typename TextRange>
CorpusStats build_corpus_stats(const TextRange& texts) {
    CorpusStats stats;
    for (const auto& text : texts) {
        stats.num_docs += 1;
        auto toks = normalized_tokens(text);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (auto& t : toks) stats.doc_freq[t] += 1;
    }
    return stats;
}

// Mean TF-IDF over token occurrences: (1/|t|) * sum_w tf(w) * [tf(w)/|t| * idf(w)].
inline double informativeness(std::string_view text, const CorpusStats& stats) {
    const auto toks = normalized_tokens(text);
    if (toks.empty()) return 0.0;
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : toks) tf[t] += 1;
    const double len = static_cast<double>(toks.size());
    double sum = 0.0;
    for (const auto& [tok, count] : tf) {
        const double tfw = static_cast<double>(count) / len;
        sum += static_cast<double>(count) * tfw * stats.idf(tok);
    }
    return sum / len;
}

// Distinct normalized tokens of `text` ranked by tf-idf (descending, ties
// alphabetical). Uses the same tf-idf weighting as informativeness().
inline std::vector<std::string> top_keywords(std::string_view text, const CorpusStats& stats,
                                             std::size_t k) {
    const auto toks = normalized_tokens(text);
    if (toks.empty()) return {};
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : toks) tf[t] += 1;
    const double len = static_cast<double>(toks.size());
    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(tf.size());
    for (const auto& [tok, count] : tf) {
        scored.emplace_back(static_cast<double>(count) / len * stats.idf(tok), tok);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (scored.size() > k) scored.resize(k);
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& [score, tok] : scored) out.push_back(std::move(tok));
    return out;
}

// First `k` sentences, splitting on '.', '!', '?' runs.
inline std::string leading_sentences(std::string_view text, std::size_t k) {
    std::size_t found = 0;
    std::size_t i = 0;
    while (i < text.size() && found < k) {
        const char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            while (i + 1 < text.size() &&
                   (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?'))
                ++i;
            found += 1;
        }
        ++i;
    }
    std::string out(text.substr(0, i));
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.front())))
        out.erase(out.begin());
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out.push_back(' ');
        out += toks[i];
    }
    return out;
}

}  // namespace laga::detail
