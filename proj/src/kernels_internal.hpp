#pragma once

#include "qpcrfbi/kernels.hpp"

namespace qpcrfbi::kernels {

#if defined(QPCRFBI_HAVE_AVX2)
const Backend& avx2_backend();
#endif

}  // namespace qpcrfbi::kernels
