#pragma once

// Test-only reference computations. Each one is written the slow, obvious way
// and shares no code with the library paths it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "pcpo/random.hpp"
#include "pcpo/token.hpp"

namespace pcpo::oracle {

using Seq = std::vector<TokenId>;

/// Full (m+1) x (n+1) Levenshtein table.
inline std::size_t edit_distance(const Seq& a, const Seq& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) t[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) t[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i][j] = std::min({t[i - 1][j] + 1, t[i][j - 1] + 1,
                                t[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
    }
    return t[a.size()][b.size()];
}

inline std::size_t lcs_length(const Seq& a, const Seq& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
        }
    }
    return t[a.size()][b.size()];
}

/// Number of distinct maximum-size monotone matchings (LCS alignments as index sets).
inline std::size_t lcs_alignment_count(const Seq& a, const Seq& b) {
    const std::size_t m = a.size(), n = b.size();
    std::vector<std::vector<std::size_t>> best(m + 1, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t i = m; i-- > 0;) {
        for (std::size_t j = n; j-- > 0;) {
            best[i][j] = std::max(best[i + 1][j], best[i][j + 1]);
            if (a[i] == b[j]) best[i][j] = std::max(best[i][j], best[i + 1][j + 1] + 1);
        }
    }
    std::vector<std::vector<std::size_t>> count(m + 1, std::vector<std::size_t>(n + 1, 1));
    for (std::size_t i = m; i-- > 0;) {
        for (std::size_t j = n; j-- > 0;) {
            if (best[i][j] == 0) {
                count[i][j] = 1;
                continue;
            }
            std::size_t c = 0;
            for (std::size_t ii = i; ii < m; ++ii) {
                for (std::size_t jj = j; jj < n; ++jj) {
                    if (a[ii] == b[jj] && best[ii + 1][jj + 1] + 1 == best[i][j]) {
                        c += count[ii + 1][jj + 1];
                    }
                }
            }
            count[i][j] = c;
        }
    }
    return count[0][0];
}

/// True when there is exactly one inclusion-maximal monotone matching, i.e.
/// the set of all equal-token pairs is itself strictly increasing in both
/// coordinates. Its size is then the LCS length.
inline bool unique_maximal_alignment(const Seq& a, const Seq& b) {
    std::vector<std::pair<std::size_t, std::size_t>> equal;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (a[i] == b[j]) equal.emplace_back(i, j);
        }
    }
    for (std::size_t t = 1; t < equal.size(); ++t) {
        if (equal[t].first <= equal[t - 1].first || equal[t].second <= equal[t - 1].second) return false;
    }
    return true;
}

/// Block-recursive matcher by brute force: enumerate every common contiguous
/// block with a triple loop, pick (longest, earliest in a, earliest in b),
/// recurse left and right.
inline void naive_blocks(const Seq& a, const Seq& b, std::size_t alo, std::size_t ahi, std::size_t blo,
                         std::size_t bhi, std::vector<std::pair<std::size_t, std::size_t>>& out) {
    std::size_t bi = 0, bj = 0, bl = 0;
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            std::size_t l = 0;
            while (i + l < ahi && j + l < bhi && a[i + l] == b[j + l]) ++l;
            if (l > bl) {
                bi = i;
                bj = j;
                bl = l;
            }
        }
    }
    if (bl == 0) return;
    naive_blocks(a, b, alo, bi, blo, bj, out);
    for (std::size_t t = 0; t < bl; ++t) out.emplace_back(bi + t, bj + t);
    naive_blocks(a, b, bi + bl, ahi, bj + bl, bhi, out);
}

inline std::vector<std::pair<std::size_t, std::size_t>> naive_match(const Seq& a, const Seq& b) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    naive_blocks(a, b, 0, a.size(), 0, b.size(), out);
    return out;
}

/// log p(tokens) for a bigram table, computing each step's probability as
/// exp(logit) / sum(exp(row)) and only then taking the log.
inline double bigram_logprob(const std::vector<double>& logits, std::size_t vocab,
                             const std::vector<std::size_t>& tokens) {
    double total = 0.0;
    std::size_t prev = 0;
    for (std::size_t t : tokens) {
        double z = 0.0;
        for (std::size_t c = 0; c < vocab; ++c) z += std::exp(logits[prev * vocab + c]);
        total += std::log(std::exp(logits[prev * vocab + t]) / z);
        prev = t;
    }
    return total;
}

inline Seq random_seq(Rng& rng, std::size_t min_len, std::size_t max_len, std::size_t alphabet) {
    Seq s(rng.between(min_len, max_len));
    for (auto& t : s) t = static_cast<TokenId>(rng.below(alphabet));
    return s;
}

}  // namespace pcpo::oracle

namespace pcpo::oracle {

struct ScoredCandidate {
    std::size_t chosen = 0;
    std::size_t rank = 1;
    double s_w = 0.0;
};

/// Index of the winning candidate: look at every candidate and keep the one no
/// other candidate beats under (higher s_w, lower rank, lower chosen index).
inline std::optional<std::size_t> brute_force_argmax(const std::vector<ScoredCandidate>& group) {
    for (std::size_t i = 0; i < group.size(); ++i) {
        bool beaten = false;
        for (std::size_t j = 0; j < group.size() && !beaten; ++j) {
            if (i == j) continue;
            const auto& a = group[i];
            const auto& b = group[j];
            if (b.s_w > a.s_w) beaten = true;
            else if (b.s_w == a.s_w && b.rank < a.rank) beaten = true;
            else if (b.s_w == a.s_w && b.rank == a.rank && b.chosen < a.chosen) beaten = true;
        }
        if (!beaten) return i;
    }
    return std::nullopt;
}

}  // namespace pcpo::oracle
