#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels/kernels_internal.hpp"

namespace pcpo::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(PCPO_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* best_available() {
    if (const char* env = std::getenv("PCPO_ISA"); env != nullptr && std::string(env) == "scalar") {
        return &detail::scalar_table;
    }
    if (const KernelTable* t = table_for(Isa::avx2)) {
        return t;
    }
    return &detail::scalar_table;
}

const KernelTable*& current() {
    static const KernelTable* table = best_available();
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable* table_for(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return &detail::scalar_table;
        case Isa::avx2:
#if defined(PCPO_HAVE_AVX2_KERNELS)
            if (cpu_has_avx2()) {
                return &detail::avx2_table;
            }
#endif
            return nullptr;
    }
    return nullptr;
}

const KernelTable& active() { return *current(); }

void force_isa(Isa isa) {
    const KernelTable* t = table_for(isa);
    if (t == nullptr) {
        throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
    }
    current() = t;
}

RowRun common_run_row(TokenId a, std::span<const TokenId> b,
                      std::span<const std::int32_t> prev, std::span<std::int32_t> cur) {
    if (prev.size() != b.size() + 1 || cur.size() != b.size() + 1) {
        throw std::invalid_argument("common_run_row: row buffers must hold b.size() + 1 entries");
    }
    return active().common_run_row(a, b.data(), b.size(), prev.data(), cur.data());
}

void edit_distance_row(TokenId a, std::span<const TokenId> b,
                       std::span<const std::int32_t> prev, std::span<std::int32_t> cur) {
    if (prev.size() != b.size() + 1 || cur.size() != b.size() + 1) {
        throw std::invalid_argument("edit_distance_row: row buffers must hold b.size() + 1 entries");
    }
    active().edit_distance_row(a, b.data(), b.size(), prev.data(), cur.data());
}

void consistency(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    if (x.size() != y.size() || out.size() != x.size()) {
        throw std::invalid_argument("consistency: input and output sizes differ");
    }
    active().consistency(x.data(), y.data(), out.data(), x.size());
}

}  // namespace pcpo::kernels
