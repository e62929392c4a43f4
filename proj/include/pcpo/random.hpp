#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pcpo {

/// Deterministic across standard libraries: mt19937_64 output is fully
/// specified, and the mappings below avoid the unspecified std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Modulo bias is negligible for the small n used here.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    /// Uniform integer in [lo, hi].
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

private:
    std::mt19937_64 engine_;
};

}  // namespace pcpo
