#pragma once

// Dense complex inner loops used by the master-equation right-hand side, the
// trajectory propagators and the adaptive integrator. Every kernel has a
// portable scalar reference; vectorized variants are selected once at runtime
// and must agree with the reference to rounding.

#include <complex>
#include <cstddef>
#include <string_view>

namespace cqed::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  // c = a * b, all n x n column-major.
  void (*gemm)(std::size_t n, const cplx* a, const cplx* b, cplx* c);
  // y = a * x, a is n x n column-major.
  void (*gemv)(std::size_t n, const cplx* a, const cplx* x, cplx* y);
  // y += alpha * x over n doubles.
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|)) over n doubles.
  double (*scaled_max_error)(std::size_t n, const double* err, const double* y0,
                             const double* y1, double atol, double rtol);
  // sum_i |x_i|^2 over n complex values.
  double (*norm_sq)(std::size_t n, const cplx* x);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();

// The table used by the library. Picked on first use: AVX2+FMA when
// available, unless the environment variable CQED_KERNELS=scalar is set.
const KernelTable& active();

// Overrides the runtime choice (tests and benchmarks). Returns false if the
// requested ISA is unavailable on this machine.
bool select(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace cqed::kernels
