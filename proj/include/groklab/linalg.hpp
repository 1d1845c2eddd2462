#pragma once

#include <cstddef>

#include "groklab/scalar.hpp"

namespace groklab {
namespace la {

// Row-major C(m x n) = alpha * op(A)(m x k) * op(B)(k x n) + beta * C.
// Double calls straight into BLAS; the Dual overload splits value/derivative
// planes and applies the product rule with three BLAS multiplies.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, const double* b, double beta, double* c);
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const Dual* a, const Dual* b, double beta, Dual* c);

void set_blas_threads(int n);

}  // namespace la
}  // namespace groklab
