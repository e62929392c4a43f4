#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcpo/answer.hpp"
#include "pcpo/token.hpp"

namespace pcpo {

/// Default number of nearest winners kept per loser. Rank 5 already covers
/// about 95% of selected pairs in practice, so k = 5 is a reasonable cheaper setting.
inline constexpr std::size_t kDefaultTopK = 8;

struct CandidatePair {
    std::size_t chosen_index = 0;    // winner response index
    std::size_t rejected_index = 0;  // loser response index
    std::size_t distance = 0;        // token-level Levenshtein distance
    std::size_t rank = 1;            // 1 = nearest winner for this loser

    bool operator==(const CandidatePair&) const = default;
};

struct LoserCandidates {
    std::size_t rejected_index = 0;
    std::vector<CandidatePair> candidates;  // ascending rank
};

/// Minimum number of single-token insertions, deletions and substitutions
/// turning `a` into `b`.
std::size_t levenshtein(std::span<const TokenId> a, std::span<const TokenId> b);

/// For every loser, the min(p, k) winners with the smallest token edit distance
/// (ties to the smaller winner index), ranked 1..min(p, k). Groups come out in
/// loser order. Empty when p == 0 or q == 0. `responses` holds the interned
/// token sequence of every response in the prompt.
/// Throws std::invalid_argument if k == 0 or an index is out of range.
std::vector<LoserCandidates> build_candidates(const Partition& partition,
                                              std::span<const std::vector<TokenId>> responses,
                                              std::size_t k);

}  // namespace pcpo
