#pragma once

// Dormand-Prince 5(4) with embedded error control, operating on flat complex
// state vectors. The error norm is the max over real and imaginary parts of
// |err| / (atol + rtol * |y|).

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace cqed {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 -> automatic
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;    // absolute floor, us
  std::size_t max_steps = 5'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
};

class Dopri5 {
 public:
  using cplx = std::complex<double>;
  using Rhs = std::function<void(double t, std::span<const cplx> y, std::span<cplx> dy)>;

  Dopri5(std::size_t size, OdeOptions options = {});

  // Advances y from t0 to t1 (t1 > t0) in place. Throws IntegratorError when
  // the step size collapses below min_step or the step budget is exhausted.
  void integrate(const Rhs& rhs, double t0, double t1, std::span<cplx> y);

  // Forget the step-size history (e.g. after a discontinuity in the RHS).
  void reset() { h_ = 0.0; }

  const OdeStats& stats() const { return stats_; }
  const OdeOptions& options() const { return options_; }

 private:
  double initial_step(const Rhs& rhs, double t0, double t1, std::span<const cplx> y);

  std::size_t n_;
  OdeOptions options_;
  OdeStats stats_;
  double h_ = 0.0;
  std::vector<cplx> k_[7];
  std::vector<cplx> tmp_, y_new_, err_;
};

}  // namespace cqed
