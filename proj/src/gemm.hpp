#pragma once

// ISA-specific matrix-product kernels. c is zero on entry and receives
// c[i*m + j] = fma chain over p of a[i*a_row + p*a_col] * b[p*m + j].

#include <cstddef>

namespace dgold::detail {

void gemm_avx2(const double* a, std::size_t a_row, std::size_t a_col, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m);
void gemm_avx512(const double* a, std::size_t a_row, std::size_t a_col, const double* b, double* c, std::size_t n,
                 std::size_t k, std::size_t m);

}  // namespace dgold::detail
