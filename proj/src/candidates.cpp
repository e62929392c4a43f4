#include "pcpo/candidates.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "pcpo/kernels.hpp"

namespace pcpo {

std::size_t levenshtein(std::span<const TokenId> a, std::span<const TokenId> b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    if (b.empty()) {
        return a.size();
    }
    const auto& k = kernels::active();
    std::vector<std::int32_t> prev(b.size() + 1);
    std::vector<std::int32_t> cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        cur[0] = static_cast<std::int32_t>(i + 1);
        k.edit_distance_row(a[i], b.data(), b.size(), prev.data(), cur.data());
        std::swap(prev, cur);
    }
    return static_cast<std::size_t>(prev.back());
}

std::vector<LoserCandidates> build_candidates(const Partition& partition,
                                              std::span<const std::vector<TokenId>> responses,
                                              std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("build_candidates: k must be at least 1");
    }
    std::vector<LoserCandidates> out;
    if (partition.p() == 0 || partition.q() == 0) {
        return out;
    }
    auto checked = [&](std::size_t index) -> const std::vector<TokenId>& {
        if (index >= responses.size()) {
            throw std::invalid_argument("build_candidates: response index out of range");
        }
        return responses[index];
    };

    const std::size_t keep = std::min(partition.p(), k);
    out.reserve(partition.q());
    for (std::size_t loser : partition.losers) {
        const auto& rejected = checked(loser);
        std::vector<CandidatePair> row;
        row.reserve(partition.p());
        for (std::size_t winner : partition.winners) {
            row.push_back({winner, loser, levenshtein(checked(winner), rejected), 0});
        }
        const auto closer = [](const CandidatePair& x, const CandidatePair& y) {
            return x.distance != y.distance ? x.distance < y.distance : x.chosen_index < y.chosen_index;
        };
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end(), closer);
        row.resize(keep);
        for (std::size_t r = 0; r < row.size(); ++r) {
            row[r].rank = r + 1;
        }
        out.push_back({loser, std::move(row)});
    }
    return out;
}

}  // namespace pcpo
