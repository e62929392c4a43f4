#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pcpo/token.hpp"

namespace pcpo {

struct MatchResult {
    std::vector<bool> mask_chosen;
    std::vector<bool> mask_rejected;
    /// (chosen position, rejected position), strictly increasing in both.
    std::vector<std::pair<std::size_t, std::size_t>> index_map;

    bool operator==(const MatchResult&) const = default;
};

/// Aligns common tokens of two sequences by recursive longest-block matching:
/// take the longest contiguous run of equal tokens (ties: earliest start in
/// `chosen`, then earliest in `rejected`), keep it, and recurse on the pieces
/// to its left and right. Every kept block of length >= 1 is marked in both
/// masks. This is the gestalt (Ratcliff-Obershelp) matcher without any
/// junk heuristic, so its matched count can fall short of the LCS length.
///
/// Throws std::invalid_argument("empty sequence") if either input is empty.
MatchResult match_tokens(std::span<const TokenId> chosen, std::span<const TokenId> rejected);

}  // namespace pcpo
