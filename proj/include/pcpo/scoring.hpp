#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "pcpo/alignment.hpp"
#include "pcpo/candidates.hpp"
#include "pcpo/corpus.hpp"

namespace pcpo {

struct ScoredPair {
    CandidatePair candidate;
    MatchResult match;
    std::vector<double> token_scores;  // one per index_map entry, in (0, 1]
    double s_w = 0.0;
};

/// exp(-|lp_chosen - lp_rejected|): 1 when both responses assign the aligned
/// token the same log-probability. Throws std::domain_error("non-finite
/// log-probability") on NaN or infinite input.
double token_consistency(double lp_chosen, double lp_rejected);

/// Scores every aligned token with each response's own log-probability at its
/// own position, then s_w = sum(scores) / len(rejected). The sum runs
/// sequentially in index_map order. An empty match gives s_w = 0.
/// Throws std::out_of_range for a match that does not fit the two responses.
ScoredPair pair_weighted_score(const ResponseRecord& chosen, const ResponseRecord& rejected,
                               MatchResult match);

/// Same, on raw log-probability sequences.
ScoredPair pair_weighted_score(std::span<const double> chosen_logprobs,
                               std::span<const double> rejected_logprobs, MatchResult match);

struct ScoredGroup {
    std::size_t rejected_index = 0;
    std::vector<ScoredPair> candidates;
};

struct Selection {
    std::size_t chosen_index = 0;
    double s_w = 0.0;
    std::size_t rank = 1;
    std::size_t distance = 0;
    std::size_t matched_token_count = 0;

    bool operator==(const Selection&) const = default;
};

struct SelectionOutcome {
    std::map<std::size_t, Selection> selected;  // keyed by rejected index
    std::vector<std::size_t> skipped;           // rejected indices with no candidate
};

/// Per rejected response, the candidate with the largest s_w. Ties go to the
/// smaller Levenshtein rank, then the smaller chosen index.
SelectionOutcome select_pairs(std::span<const ScoredGroup> groups);

}  // namespace pcpo
