#include "groklab/linalg.hpp"

#include <cblas.h>

#include <vector>

namespace groklab {
namespace la {

void set_blas_threads(int n) { openblas_set_num_threads(n); }

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, const double* b, double beta, double* c) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a,
              trans_a ? m : k, b, trans_b ? k : n, beta, c, n);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const Dual* a, const Dual* b, double beta, Dual* c) {
  const std::size_t na = static_cast<std::size_t>(m) * k;
  const std::size_t nb = static_cast<std::size_t>(k) * n;
  const std::size_t nc = static_cast<std::size_t>(m) * n;

  thread_local std::vector<double> av, ad, bv, bd, cv, cd;
  av.resize(na);
  ad.resize(na);
  bv.resize(nb);
  bd.resize(nb);
  cv.resize(nc);
  cd.resize(nc);

  for (std::size_t i = 0; i < na; ++i) {
    av[i] = a[i].v;
    ad[i] = a[i].d;
  }
  for (std::size_t i = 0; i < nb; ++i) {
    bv[i] = b[i].v;
    bd[i] = b[i].d;
  }
  if (beta != 0.0) {
    for (std::size_t i = 0; i < nc; ++i) {
      cv[i] = c[i].v;
      cd[i] = c[i].d;
    }
  }

  gemm(trans_a, trans_b, m, n, k, alpha, av.data(), bv.data(), beta, cv.data());
  gemm(trans_a, trans_b, m, n, k, alpha, ad.data(), bv.data(), beta, cd.data());
  gemm(trans_a, trans_b, m, n, k, alpha, av.data(), bd.data(), 1.0, cd.data());

  for (std::size_t i = 0; i < nc; ++i) {
    c[i].v = cv[i];
    c[i].d = cd[i];
  }
}

}  // namespace la
}  // namespace groklab
