#include <algorithm>
#include <cmath>

#include "kernels/kernels_internal.hpp"

namespace pcpo::kernels::detail {
namespace {

RowRun common_run_row_scalar(TokenId a, const TokenId* b, std::size_t n,
                             const std::int32_t* prev, std::int32_t* cur) {
    RowRun best;
    cur[0] = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::int32_t v = (b[j] == a) ? prev[j] + 1 : 0;
        cur[j + 1] = v;
        if (v > best.length) {
            best.length = v;
            best.end = j;
        }
    }
    return best;
}

void edit_distance_row_scalar(TokenId a, const TokenId* b, std::size_t n,
                              const std::int32_t* prev, std::int32_t* cur) {
    for (std::size_t j = 0; j < n; ++j) {
        const std::int32_t substitute = prev[j] + (b[j] != a ? 1 : 0);
        const std::int32_t remove = prev[j + 1] + 1;
        const std::int32_t insert = cur[j] + 1;
        cur[j + 1] = std::min({substitute, remove, insert});
    }
}

// Same reduction, polynomial and rounding steps as the AVX2 exp, one lane at a
// time, so both tables give identical bits and nothing depends on libm's exp.
double exp_nonpositive(double x) {
    if (x < -745.1332191019412) {
        return 0.0;
    }
    x = x > -745.0 ? x : -745.0;

    const double n = std::nearbyint(x * 1.4426950408889634);
    double r = std::fma(-n, 6.93147180369123816490e-01, x);
    r = std::fma(-n, 1.90821492927058770002e-10, r);

    double p = 1.0 / 6227020800.0;
    for (double c : {1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
                     1.0 / 40320.0, 1.0 / 5040.0, 1.0 / 720.0, 1.0 / 120.0, 1.0 / 24.0,
                     1.0 / 6.0, 0.5, 1.0, 1.0}) {
        p = std::fma(p, r, c);
    }

    const double half = std::floor(n * 0.5);
    const double rest = n - half;
    return std::ldexp(std::ldexp(p, static_cast<int>(half)), static_cast<int>(rest));
}

void consistency_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = exp_nonpositive(-std::fabs(x[i] - y[i]));
    }
}

}  // namespace

const KernelTable scalar_table{
    Isa::scalar,
    &common_run_row_scalar,
    &edit_distance_row_scalar,
    &consistency_scalar,
};

}  // namespace pcpo::kernels::detail
