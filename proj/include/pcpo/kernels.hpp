#pragma once

// Runtime-dispatched inner loops. Every kernel has a scalar reference
// implementation; SIMD variants must agree with it (exactly for the integer
// kernels, to a few ulp for the floating-point one).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "pcpo/token.hpp"

namespace pcpo::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Longest run found in one row of the common-substring table.
struct RowRun {
    std::int32_t length = 0;  // 0 when the row has no equal token
    std::size_t end = 0;      // index into `b` of the run's last token (first such index in the row)
};

struct KernelTable {
    Isa isa;

    /// One row of the longest-common-suffix table for token `a` against `b`.
    /// `prev` and `cur` have b.size() + 1 entries; entry 0 is a zero sentinel.
    /// cur[j + 1] = (b[j] == a) ? prev[j] + 1 : 0.
    RowRun (*common_run_row)(TokenId a, const TokenId* b, std::size_t n,
                             const std::int32_t* prev, std::int32_t* cur);

    /// One row of the Levenshtein table. cur[0] must be set by the caller.
    /// cur[j + 1] = min(prev[j] + (a != b[j]), prev[j + 1] + 1, cur[j] + 1).
    void (*edit_distance_row)(TokenId a, const TokenId* b, std::size_t n,
                              const std::int32_t* prev, std::int32_t* cur);

    /// out[i] = exp(-|x[i] - y[i]|).
    void (*consistency)(const double* x, const double* y, double* out, std::size_t n);
};

/// Kernels chosen for this process: the best ISA the CPU supports, unless
/// PCPO_ISA=scalar is set in the environment or `force_isa` was called.
const KernelTable& active();

/// A specific implementation, or nullptr when it is not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa);

/// Pin the dispatch (tests and benchmarking). Throws std::invalid_argument if unavailable.
void force_isa(Isa isa);

// Span conveniences over the active table.
RowRun common_run_row(TokenId a, std::span<const TokenId> b,
                      std::span<const std::int32_t> prev, std::span<std::int32_t> cur);
void edit_distance_row(TokenId a, std::span<const TokenId> b,
                       std::span<const std::int32_t> prev, std::span<std::int32_t> cur);
void consistency(std::span<const double> x, std::span<const double> y, std::span<double> out);

}  // namespace pcpo::kernels
