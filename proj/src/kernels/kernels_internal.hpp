#pragma once

#include "pcpo/kernels.hpp"

namespace pcpo::kernels::detail {

extern const KernelTable scalar_table;

#if defined(PCPO_HAVE_AVX2_KERNELS)
extern const KernelTable avx2_table;
#endif

}  // namespace pcpo::kernels::detail
