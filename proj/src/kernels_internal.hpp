#pragma once

#include "psvrg/kernels.hpp"

namespace psvrg::kernels {

#ifdef PSVRG_HAVE_AVX2
const KernelTable& avx2_table();
#endif

}  // namespace psvrg::kernels
