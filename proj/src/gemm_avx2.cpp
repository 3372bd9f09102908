#include "gemm.hpp"

#define DGOLD_GEMM_LANES 4
#define DGOLD_GEMM_NAME gemm_avx2
#include "gemm_kernel.inc"
