#pragma once

#include "cqed/kernels.hpp"

namespace cqed::kernels::detail {

void gemm_scalar(std::size_t n, const cplx* a, const cplx* b, cplx* c);
void gemv_scalar(std::size_t n, const cplx* a, const cplx* x, cplx* y);
void axpy_scalar(std::size_t n, double alpha, const double* x, double* y);
double scaled_max_error_scalar(std::size_t n, const double* err, const double* y0,
                               const double* y1, double atol, double rtol);
double norm_sq_scalar(std::size_t n, const cplx* x);

#if defined(CQED_HAVE_AVX2_KERNELS)
void gemm_avx2(std::size_t n, const cplx* a, const cplx* b, cplx* c);
void gemv_avx2(std::size_t n, const cplx* a, const cplx* x, cplx* y);
void axpy_avx2(std::size_t n, double alpha, const double* x, double* y);
double scaled_max_error_avx2(std::size_t n, const double* err, const double* y0,
                             const double* y1, double atol, double rtol);
double norm_sq_avx2(std::size_t n, const cplx* x);
#endif

}  // namespace cqed::kernels::detail
