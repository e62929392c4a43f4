#include "pcpo/scoring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pcpo/kernels.hpp"

namespace pcpo {

double token_consistency(double lp_chosen, double lp_rejected) {
    if (!std::isfinite(lp_chosen) || !std::isfinite(lp_rejected)) {
        throw std::domain_error("non-finite log-probability");
    }
    return std::exp(-std::fabs(lp_chosen - lp_rejected));
}

ScoredPair pair_weighted_score(std::span<const double> chosen_logprobs,
                               std::span<const double> rejected_logprobs, MatchResult match) {
    if (rejected_logprobs.empty()) {
        throw std::out_of_range("pair_weighted_score: rejected response has no tokens");
    }
    const std::size_t n = match.index_map.size();
    std::vector<double> lp_c(n);
    std::vector<double> lp_r(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto [ci, rj] = match.index_map[t];
        if (ci >= chosen_logprobs.size() || rj >= rejected_logprobs.size()) {
            throw std::out_of_range("pair_weighted_score: match entry (" + std::to_string(ci) + ", " +
                                    std::to_string(rj) + ") outside the responses");
        }
        lp_c[t] = chosen_logprobs[ci];
        lp_r[t] = rejected_logprobs[rj];
        if (!std::isfinite(lp_c[t]) || !std::isfinite(lp_r[t])) {
            throw std::domain_error("non-finite log-probability");
        }
    }

    ScoredPair out;
    out.token_scores.resize(n);
    kernels::consistency(lp_c, lp_r, out.token_scores);
    double sum = 0.0;
    for (double c : out.token_scores) {
        sum += c;
    }
    out.s_w = sum / static_cast<double>(rejected_logprobs.size());
    out.match = std::move(match);
    return out;
}

ScoredPair pair_weighted_score(const ResponseRecord& chosen, const ResponseRecord& rejected,
                               MatchResult match) {
    return pair_weighted_score(chosen.logprobs, rejected.logprobs, std::move(match));
}

SelectionOutcome select_pairs(std::span<const ScoredGroup> groups) {
    SelectionOutcome out;
    for (const ScoredGroup& group : groups) {
        const ScoredPair* best = nullptr;
        for (const ScoredPair& c : group.candidates) {
            if (best == nullptr || c.s_w > best->s_w ||
                (c.s_w == best->s_w &&
                 (c.candidate.rank < best->candidate.rank ||
                  (c.candidate.rank == best->candidate.rank &&
                   c.candidate.chosen_index < best->candidate.chosen_index)))) {
                best = &c;
            }
        }
        if (best == nullptr) {
            out.skipped.push_back(group.rejected_index);
            continue;
        }
        out.selected[group.rejected_index] = {best->candidate.chosen_index, best->s_w,
                                              best->candidate.rank, best->candidate.distance,
                                              best->match.index_map.size()};
    }
    return out;
}

}  // namespace pcpo
