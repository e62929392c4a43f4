#include <immintrin.h>

#include <algorithm>
#include <cstdint>

#include "kernels/kernels_internal.hpp"

#define PCPO_AVX2 __attribute__((target("avx2,fma")))

namespace pcpo::kernels::detail {
namespace {

// Large enough to never win a min, small enough that +8 does not overflow.
constexpr std::int32_t kFar = 0x3fffffff;

PCPO_AVX2 inline std::int32_t hmax_epi32(__m256i v) {
    __m128i m = _mm_max_epi32(_mm256_castsi256_si128(v), _mm256_extracti128_si256(v, 1));
    m = _mm_max_epi32(m, _mm_shuffle_epi32(m, _MM_SHUFFLE(1, 0, 3, 2)));
    m = _mm_max_epi32(m, _mm_shuffle_epi32(m, _MM_SHUFFLE(2, 3, 0, 1)));
    return _mm_cvtsi128_si32(m);
}

PCPO_AVX2 RowRun common_run_row_avx2(TokenId a, const TokenId* b, std::size_t n,
                                     const std::int32_t* prev, std::int32_t* cur) {
    cur[0] = 0;
    const __m256i va = _mm256_set1_epi32(static_cast<std::int32_t>(a));
    const __m256i one = _mm256_set1_epi32(1);
    __m256i vmax = _mm256_setzero_si256();

    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + j));
        const __m256i eq = _mm256_cmpeq_epi32(vb, va);
        const __m256i vp = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev + j));
        const __m256i v = _mm256_and_si256(_mm256_add_epi32(vp, one), eq);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(cur + j + 1), v);
        vmax = _mm256_max_epi32(vmax, v);
    }
    std::int32_t best = hmax_epi32(vmax);
    for (; j < n; ++j) {
        const std::int32_t v = (b[j] == a) ? prev[j] + 1 : 0;
        cur[j + 1] = v;
        best = std::max(best, v);
    }

    RowRun run;
    if (best == 0) {
        return run;
    }
    run.length = best;

    const __m256i target = _mm256_set1_epi32(best);
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cur + k + 1));
        const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(v, target)));
        if (mask != 0) {
            run.end = k + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
            return run;
        }
    }
    for (; k < n; ++k) {
        if (cur[k + 1] == best) {
            run.end = k;
            return run;
        }
    }
    return run;
}

// Shift lanes up by `count` (lane i takes lane i - count), filling with kFar.
template <int Count>
PCPO_AVX2 inline __m256i shift_up(__m256i v) {
    static_assert(Count == 1 || Count == 2 || Count == 4);
    __m256i idx;
    __m256i keep;
    if constexpr (Count == 1) {
        idx = _mm256_setr_epi32(0, 0, 1, 2, 3, 4, 5, 6);
        keep = _mm256_setr_epi32(0, -1, -1, -1, -1, -1, -1, -1);
    } else if constexpr (Count == 2) {
        idx = _mm256_setr_epi32(0, 0, 0, 1, 2, 3, 4, 5);
        keep = _mm256_setr_epi32(0, 0, -1, -1, -1, -1, -1, -1);
    } else {
        idx = _mm256_setr_epi32(0, 0, 0, 0, 0, 1, 2, 3);
        keep = _mm256_setr_epi32(0, 0, 0, 0, -1, -1, -1, -1);
    }
    const __m256i moved = _mm256_permutevar8x32_epi32(v, idx);
    return _mm256_blendv_epi8(_mm256_set1_epi32(kFar), moved, keep);
}

PCPO_AVX2 void edit_distance_row_avx2(TokenId a, const TokenId* b, std::size_t n,
                                      const std::int32_t* prev, std::int32_t* cur) {
    const __m256i va = _mm256_set1_epi32(static_cast<std::int32_t>(a));
    const __m256i one = _mm256_set1_epi32(1);
    const __m256i two = _mm256_set1_epi32(2);
    const __m256i four = _mm256_set1_epi32(4);
    const __m256i ramp = _mm256_setr_epi32(1, 2, 3, 4, 5, 6, 7, 8);

    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + j));
        const __m256i ne = _mm256_andnot_si256(_mm256_cmpeq_epi32(vb, va), one);
        const __m256i diag = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev + j));
        const __m256i up = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev + j + 1));
        __m256i d = _mm256_min_epi32(_mm256_add_epi32(diag, ne), _mm256_add_epi32(up, one));

        // Insertions inside the block: d[k] = min over m <= k of d[m] + (k - m).
        d = _mm256_min_epi32(d, _mm256_add_epi32(shift_up<1>(d), one));
        d = _mm256_min_epi32(d, _mm256_add_epi32(shift_up<2>(d), two));
        d = _mm256_min_epi32(d, _mm256_add_epi32(shift_up<4>(d), four));
        // Insertions continuing from the cell left of the block.
        d = _mm256_min_epi32(d, _mm256_add_epi32(_mm256_set1_epi32(cur[j]), ramp));

        _mm256_storeu_si256(reinterpret_cast<__m256i*>(cur + j + 1), d);
    }
    for (; j < n; ++j) {
        const std::int32_t substitute = prev[j] + (b[j] != a ? 1 : 0);
        const std::int32_t remove = prev[j + 1] + 1;
        const std::int32_t insert = cur[j] + 1;
        cur[j + 1] = std::min({substitute, remove, insert});
    }
}

// 2^k for integral k in the normal exponent range.
PCPO_AVX2 inline __m256d pow2(__m256d k) {
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
    const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)),
                                        _mm256_castpd_si256(magic));
    return _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52));
}

// exp(x) for x <= 0. Cody-Waite reduction by ln 2, degree-13 Taylor polynomial
// on |r| <= ln(2)/2, and a two-step 2^n scale so subnormal results stay exact.
PCPO_AVX2 inline __m256d exp_nonpositive(__m256d x) {
    const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-745.1332191019412), _CMP_LT_OQ);
    x = _mm256_max_pd(x, _mm256_set1_pd(-745.0));

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    const __m256d half = _mm256_round_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)),
                                         _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
    const __m256d rest = _mm256_sub_pd(n, half);

    const __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2(half)), pow2(rest));
    return _mm256_andnot_pd(underflow, result);
}

PCPO_AVX2 void consistency_avx2(const double* x, const double* y, double* out, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        const __m256d neg_abs = _mm256_or_pd(d, sign);
        _mm256_storeu_pd(out + i, exp_nonpositive(neg_abs));
    }
    if (i < n) {
        // Tail goes through the same vector path so every element sees one exp.
        alignas(32) double xt[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double yt[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double ot[4];
        std::copy(x + i, x + n, xt);
        std::copy(y + i, y + n, yt);
        const __m256d d = _mm256_sub_pd(_mm256_load_pd(xt), _mm256_load_pd(yt));
        _mm256_store_pd(ot, exp_nonpositive(_mm256_or_pd(d, sign)));
        std::copy(ot, ot + (n - i), out + i);
    }
}

}  // namespace

const KernelTable avx2_table{
    Isa::avx2,
    &common_run_row_avx2,
    &edit_distance_row_avx2,
    &consistency_avx2,
};

}  // namespace pcpo::kernels::detail
