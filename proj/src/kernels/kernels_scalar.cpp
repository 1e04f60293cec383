#include "kernels_impl.hpp"

#include <algorithm>
#include <cmath>

namespace cqed::kernels::detail {

void gemm_scalar(std::size_t n, const cplx* a, const cplx* b, cplx* c) {
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = reinterpret_cast<double*>(c + j * n);
    std::fill(cj, cj + 2 * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double br = b[j * n + k].real();
      const double bi = b[j * n + k].imag();
      const double* ak = reinterpret_cast<const double*>(a + k * n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ar = ak[2 * i];
        const double ai = ak[2 * i + 1];
        cj[2 * i] += ar * br - ai * bi;
        cj[2 * i + 1] += ar * bi + ai * br;
      }
    }
  }
}

void gemv_scalar(std::size_t n, const cplx* a, const cplx* x, cplx* y) {
  double* yd = reinterpret_cast<double*>(y);
  std::fill(yd, yd + 2 * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double xr = x[k].real();
    const double xi = x[k].imag();
    const double* ak = reinterpret_cast<const double*>(a + k * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ar = ak[2 * i];
      const double ai = ak[2 * i + 1];
      yd[2 * i] += ar * xr - ai * xi;
      yd[2 * i + 1] += ar * xi + ai * xr;
    }
  }
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double scaled_max_error_scalar(std::size_t n, const double* err, const double* y0,
                               const double* y1, double atol, double rtol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

double norm_sq_scalar(std::size_t n, const cplx* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i]);
  return s;
}

}  // namespace cqed::kernels::detail
