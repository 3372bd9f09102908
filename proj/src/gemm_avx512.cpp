#include "gemm.hpp"

#define DGOLD_GEMM_LANES 8
#define DGOLD_GEMM_NAME gemm_avx512
#include "gemm_kernel.inc"
