#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spage/errors.hpp"

namespace spage {

// Tokenizer identifier reported alongside every score.
inline constexpr const char* METRIC_TOKENIZER_VERSION = "intl-v14";

namespace detail {

// ASCII slices of the Unicode categories the international tokenizer keys
// on. Bytes >= 0x80 count as word characters.
inline bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

inline bool is_ascii_punct(unsigned char c) {
    // Unicode category P* restricted to ASCII
    switch (c) {
        case '!': case '"': case '#': case '%': case '&': case '\'': case '(': case ')':
        case '*': case ',': case '-': case '.': case '/': case ':': case ';': case '?':
        case '@': case '[': case '\\': case ']': case '_': case '{': case '}':
            return true;
        default: return false;
    }
}

inline bool is_ascii_symbol(unsigned char c) {
    // Unicode category S* restricted to ASCII
    switch (c) {
        case '$': case '+': case '<': case '=': case '>': case '^': case '`': case '|':
        case '~':
            return true;
        default: return false;
    }
}

}  // namespace detail

// The mteval-v14 "international" tokenization: punctuation splits off unless
// it sits between digits (so 1,000 stays together), symbols always split.
inline std::vector<std::string> tokenize_intl(const std::string& text) {
    // pass 1: punctuation preceded by a non-digit
    std::string s1;
    s1.reserve(text.size() * 2);
    for (size_t i = 0; i < text.size(); ++i) {
        unsigned char prev = i > 0 ? (unsigned char)text[i - 1] : 0;
        unsigned char c = (unsigned char)text[i];
        if (i > 0 && detail::is_ascii_punct(c) && !detail::is_ascii_digit(prev)) {
            s1 += ' ';
            s1 += char(c);
            s1 += ' ';
        } else {
            s1 += char(c);
        }
    }
    // pass 2: punctuation followed by a non-digit
    std::string s2;
    s2.reserve(s1.size() * 2);
    for (size_t i = 0; i < s1.size(); ++i) {
        unsigned char c = (unsigned char)s1[i];
        unsigned char next = i + 1 < s1.size() ? (unsigned char)s1[i + 1] : 0;
        if (detail::is_ascii_punct(c) && (i + 1 == s1.size() || !detail::is_ascii_digit(next))) {
            s2 += char(c);
            s2 += ' ';
        } else {
            s2 += char(c);
        }
    }
    // pass 3: symbols always stand alone
    std::string s3;
    s3.reserve(s2.size() * 2);
    for (char c : s2) {
        if (detail::is_ascii_symbol((unsigned char)c)) {
            s3 += ' ';
            s3 += c;
            s3 += ' ';
        } else {
            s3 += c;
        }
    }
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < s3.size()) {
        while (i < s3.size() && (s3[i] == ' ' || s3[i] == '\t' || s3[i] == '\n' || s3[i] == '\r'))
            ++i;
        size_t start = i;
        while (i < s3.size() && s3[i] != ' ' && s3[i] != '\t' && s3[i] != '\n' && s3[i] != '\r')
            ++i;
        if (i > start) tokens.push_back(s3.substr(start, i - start));
    }
    return tokens;
}

struct BleuScore {
    double score = 0;                      // 0..100
    std::array<double, 4> precisions{};    // percentages
    double brevity_penalty = 1.0;
    std::size_t sys_len = 0;
    std::size_t ref_len = 0;
    const char* tokenizer = METRIC_TOKENIZER_VERSION;
};

namespace detail {

struct BleuStats {
    std::array<std::int64_t, 4> correct{};
    std::array<std::int64_t, 4> total{};
    std::size_t sys_len = 0;
    std::size_t ref_len = 0;
};

inline std::map<std::string, std::int64_t> ngram_counts(const std::vector<std::string>& tokens,
                                                        size_t n) {
    std::map<std::string, std::int64_t> counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (size_t j = 0; j < n; ++j) {
            if (j) key += '\x1f';
            key += tokens[i + j];
        }
        counts[key]++;
    }
    return counts;
}

inline void accumulate_bleu(BleuStats& stats, const std::vector<std::string>& hyp,
                            const std::vector<std::vector<std::string>>& refs) {
    stats.sys_len += hyp.size();
    // closest reference length; ties pick the shorter
    size_t best_len = refs[0].size();
    for (const auto& ref : refs) {
        auto diff = [&](size_t len) {
            return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
        };
        if (diff(ref.size()) < diff(best_len) ||
            (diff(ref.size()) == diff(best_len) && ref.size() < best_len))
            best_len = ref.size();
    }
    stats.ref_len += best_len;
    for (size_t n = 1; n <= 4; ++n) {
        auto hyp_counts = ngram_counts(hyp, n);
        std::map<std::string, std::int64_t> clip;
        for (const auto& ref : refs) {
            for (const auto& [gram, count] : ngram_counts(ref, n)) {
                auto it = clip.find(gram);
                if (it == clip.end()) clip.emplace(gram, count);
                else it->second = std::max(it->second, count);
            }
        }
        for (const auto& [gram, count] : hyp_counts) {
            stats.total[n - 1] += count;
            auto it = clip.find(gram);
            if (it != clip.end()) stats.correct[n - 1] += std::min(count, it->second);
        }
    }
}

// Exponentially smoothed BLEU-4 with the standard brevity penalty.
inline BleuScore score_from_stats(const BleuStats& stats) {
    BleuScore out;
    out.sys_len = stats.sys_len;
    out.ref_len = stats.ref_len;
    double smooth = 1.0;
    for (size_t n = 0; n < 4; ++n) {
        if (stats.total[n] == 0) break;
        if (stats.correct[n] == 0) {
            smooth *= 2.0;
            out.precisions[n] = 100.0 / (smooth * double(stats.total[n]));
        } else {
            out.precisions[n] = 100.0 * double(stats.correct[n]) / double(stats.total[n]);
        }
    }
    if (stats.sys_len < stats.ref_len)
        out.brevity_penalty =
            stats.sys_len > 0 ? std::exp(1.0 - double(stats.ref_len) / double(stats.sys_len))
                              : 0.0;
    bool all_equal = true;
    for (size_t n = 0; n < 4; ++n) {
        if (out.precisions[n] <= 0.0) {
            out.score = 0.0;
            return out;
        }
        if (out.precisions[n] != out.precisions[0]) all_equal = false;
    }
    // equal precisions have an exact geometric mean; keeps identity === 100
    double gm = all_equal ? out.precisions[0]
                          : std::exp((std::log(out.precisions[0]) + std::log(out.precisions[1]) +
                                      std::log(out.precisions[2]) + std::log(out.precisions[3])) /
                                     4.0);
    out.score = out.brevity_penalty * gm;
    return out;
}

}  // namespace detail

// Corpus BLEU-4 over (candidate, references) pairs: modified n-gram
// precisions pooled across segments, geometric mean, brevity penalty,
// exponential smoothing for zero counts.
inline BleuScore corpus_bleu(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& pairs) {
    if (pairs.empty()) throw EmptyInput("corpus_bleu needs at least one pair");
    detail::BleuStats stats;
    for (const auto& [cand, refs] : pairs) {
        if (cand.empty()) throw EmptyInput("empty candidate");
        if (refs.empty()) throw EmptyInput("no references");
        for (const auto& r : refs)
            if (r.empty()) throw EmptyInput("empty reference");
        std::vector<std::vector<std::string>> ref_tokens;
        for (const auto& r : refs) ref_tokens.push_back(tokenize_intl(r));
        detail::accumulate_bleu(stats, tokenize_intl(cand), ref_tokens);
    }
    return detail::score_from_stats(stats);
}

inline double bleu(const std::string& candidate, const std::vector<std::string>& references) {
    return corpus_bleu({{candidate, references}}).score;
}

// ---------------------------------------------------------------------------
// ROUGE-L
// ---------------------------------------------------------------------------

struct RougeScore {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

// Lowercased alphanumeric-run tokens: whitespace and punctuation both
// separate.
inline std::vector<std::string> tokenize_rouge(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        unsigned char lc = (c >= 'A' && c <= 'Z') ? c + 32 : c;
        bool word = (lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9');
        if (word) {
            current += char(lc);
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

namespace detail {

inline size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

// LCS-based F1 with beta = 1.
inline RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
    if (candidate.empty() || reference.empty()) throw EmptyInput("empty text for ROUGE-L");
    auto cand = tokenize_rouge(candidate);
    auto ref = tokenize_rouge(reference);
    RougeScore out;
    if (cand.empty() || ref.empty()) return out;
    double lcs = double(detail::lcs_length(cand, ref));
    out.precision = lcs / double(cand.size());
    out.recall = lcs / double(ref.size());
    if (out.precision + out.recall > 0)
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

inline double rouge_l_f1(const std::string& candidate, const std::string& reference) {
    return rouge_l(candidate, reference).f1;
}

}  // namespace spage
