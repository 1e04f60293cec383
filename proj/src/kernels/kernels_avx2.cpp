// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher confirmed CPU support.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace cqed::kernels::detail {
namespace {

// Two complex doubles per register: [re0, im0, re1, im1].
inline __m256d cmul_bcast(__m256d a, __m256d br, __m256d bi) {
  const __m256d swapped = _mm256_permute_pd(a, 0b0101);
  return _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(swapped, bi));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

void gemm_avx2(std::size_t n, const cplx* a, const cplx* b, cplx* c) {
  const std::size_t pairs = n / 2;
  const bool odd = (n % 2) != 0;
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = reinterpret_cast<double*>(c + j * n);
    std::fill(cj, cj + 2 * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx bkj = b[j * n + k];
      const __m256d br = _mm256_set1_pd(bkj.real());
      const __m256d bi = _mm256_set1_pd(bkj.imag());
      const double* ak = reinterpret_cast<const double*>(a + k * n);
      for (std::size_t p = 0; p < pairs; ++p) {
        const __m256d av = _mm256_loadu_pd(ak + 4 * p);
        const __m256d acc = _mm256_loadu_pd(cj + 4 * p);
        _mm256_storeu_pd(cj + 4 * p, _mm256_add_pd(acc, cmul_bcast(av, br, bi)));
      }
      if (odd) {
        const std::size_t i = n - 1;
        const double ar = ak[2 * i];
        const double ai = ak[2 * i + 1];
        cj[2 * i] += ar * bkj.real() - ai * bkj.imag();
        cj[2 * i + 1] += ar * bkj.imag() + ai * bkj.real();
      }
    }
  }
}

void gemv_avx2(std::size_t n, const cplx* a, const cplx* x, cplx* y) {
  double* yd = reinterpret_cast<double*>(y);
  std::fill(yd, yd + 2 * n, 0.0);
  const std::size_t pairs = n / 2;
  const bool odd = (n % 2) != 0;
  for (std::size_t k = 0; k < n; ++k) {
    const __m256d xr = _mm256_set1_pd(x[k].real());
    const __m256d xi = _mm256_set1_pd(x[k].imag());
    const double* ak = reinterpret_cast<const double*>(a + k * n);
    for (std::size_t p = 0; p < pairs; ++p) {
      const __m256d av = _mm256_loadu_pd(ak + 4 * p);
      const __m256d acc = _mm256_loadu_pd(yd + 4 * p);
      _mm256_storeu_pd(yd + 4 * p, _mm256_add_pd(acc, cmul_bcast(av, xr, xi)));
    }
    if (odd) {
      const std::size_t i = n - 1;
      const double ar = ak[2 * i];
      const double ai = ak[2 * i + 1];
      yd[2 * i] += ar * x[k].real() - ai * x[k].imag();
      yd[2 * i + 1] += ar * x[k].imag() + ai * x[k].real();
    }
  }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double scaled_max_error_avx2(std::size_t n, const double* err, const double* y0,
                             const double* y1, double atol, double rtol) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d va = _mm256_set1_pd(atol);
  const __m256d vr = _mm256_set1_pd(rtol);
  __m256d worst = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = _mm256_andnot_pd(sign, _mm256_loadu_pd(err + i));
    const __m256d a0 = _mm256_andnot_pd(sign, _mm256_loadu_pd(y0 + i));
    const __m256d a1 = _mm256_andnot_pd(sign, _mm256_loadu_pd(y1 + i));
    const __m256d scale = _mm256_fmadd_pd(vr, _mm256_max_pd(a0, a1), va);
    worst = _mm256_max_pd(worst, _mm256_div_pd(e, scale));
  }
  double w = hmax(worst);
  for (; i < n; ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    w = std::max(w, std::abs(err[i]) / scale);
  }
  return w;
}

double norm_sq_avx2(std::size_t n, const cplx* x) {
  const double* xd = reinterpret_cast<const double*>(x);
  const std::size_t m = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d v = _mm256_loadu_pd(xd + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < m; ++i) s += xd[i] * xd[i];
  return s;
}

}  // namespace cqed::kernels::detail
