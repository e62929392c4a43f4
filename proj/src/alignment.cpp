#include "pcpo/alignment.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "pcpo/kernels.hpp"

namespace pcpo {
namespace {

struct Block {
    std::size_t chosen = 0;
    std::size_t rejected = 0;
    std::size_t length = 0;
};

struct Region {
    std::size_t alo, ahi, blo, bhi;
};

// Longest run of equal tokens inside the region. Rows are scanned in chosen
// order and a row only replaces the best on a strictly longer run, which gives
// the earliest-in-chosen, then earliest-in-rejected tie rule.
Block longest_block(std::span<const TokenId> chosen, std::span<const TokenId> rejected,
                    const Region& r, std::vector<std::int32_t>& prev, std::vector<std::int32_t>& cur) {
    const auto& k = kernels::active();
    const std::size_t n = r.bhi - r.blo;
    std::fill_n(prev.begin(), n + 1, 0);
    Block best;
    for (std::size_t i = r.alo; i < r.ahi; ++i) {
        const kernels::RowRun run =
            k.common_run_row(chosen[i], rejected.data() + r.blo, n, prev.data(), cur.data());
        const auto len = static_cast<std::size_t>(run.length);
        if (len > best.length) {
            best = {i + 1 - len, r.blo + run.end + 1 - len, len};
        }
        std::swap(prev, cur);
    }
    return best;
}

}  // namespace

MatchResult match_tokens(std::span<const TokenId> chosen, std::span<const TokenId> rejected) {
    if (chosen.empty() || rejected.empty()) {
        throw std::invalid_argument("empty sequence");
    }
    std::vector<std::int32_t> prev(rejected.size() + 1);
    std::vector<std::int32_t> cur(rejected.size() + 1);

    std::vector<Block> blocks;
    std::vector<Region> pending{{0, chosen.size(), 0, rejected.size()}};
    while (!pending.empty()) {
        const Region r = pending.back();
        pending.pop_back();
        const Block b = longest_block(chosen, rejected, r, prev, cur);
        if (b.length == 0) {
            continue;
        }
        blocks.push_back(b);
        if (r.alo < b.chosen && r.blo < b.rejected) {
            pending.push_back({r.alo, b.chosen, r.blo, b.rejected});
        }
        if (b.chosen + b.length < r.ahi && b.rejected + b.length < r.bhi) {
            pending.push_back({b.chosen + b.length, r.ahi, b.rejected + b.length, r.bhi});
        }
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& x, const Block& y) { return x.chosen < y.chosen; });

    MatchResult m;
    m.mask_chosen.assign(chosen.size(), false);
    m.mask_rejected.assign(rejected.size(), false);
    for (const Block& b : blocks) {
        for (std::size_t t = 0; t < b.length; ++t) {
            m.mask_chosen[b.chosen + t] = true;
            m.mask_rejected[b.rejected + t] = true;
            m.index_map.emplace_back(b.chosen + t, b.rejected + t);
        }
    }
    return m;
}

}  // namespace pcpo
