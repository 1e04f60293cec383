#include "cqed/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"

namespace cqed {
namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double* dbl(std::vector<std::complex<double>>& v) { return reinterpret_cast<double*>(v.data()); }

}  // namespace

Dopri5::Dopri5(std::size_t size, OdeOptions options) : n_(size), options_(options) {
  for (auto& k : k_) k.assign(n_, cplx{});
  tmp_.assign(n_, cplx{});
  y_new_.assign(n_, cplx{});
  err_.assign(n_, cplx{});
}

double Dopri5::initial_step(const Rhs& rhs, double t0, double t1, std::span<const cplx> y) {
  const auto& kt = kernels::active();
  const std::size_t m = 2 * n_;
  const double* yd = reinterpret_cast<const double*>(y.data());
  std::vector<double> zero(m, 0.0);
  const double d0 = kt.scaled_max_error(m, yd, zero.data(), yd, options_.atol, options_.rtol);
  const double d1 =
      kt.scaled_max_error(m, dbl(k_[0]), zero.data(), yd, options_.atol, options_.rtol);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * (t1 - t0) : 0.01 * d0 / d1;
  h0 = std::min(h0, t1 - t0);
  // One explicit Euler probe for the second-derivative estimate.
  for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h0 * k_[0][i];
  rhs(t0 + h0, tmp_, k_[1]);
  ++stats_.rhs_calls;
  for (std::size_t i = 0; i < n_; ++i) err_[i] = (k_[1][i] - k_[0][i]) / h0;
  const double d2 = kt.scaled_max_error(m, dbl(err_), zero.data(), yd, options_.atol, options_.rtol);
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6 * (t1 - t0), h0 * 1e-3)
                                  : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, t1 - t0, options_.max_step});
}

void Dopri5::integrate(const Rhs& rhs, double t0, double t1, std::span<cplx> y) {
  if (y.size() != n_) throw InputError("integrator state size mismatch");
  if (!(t1 > t0)) return;
  const auto& kt = kernels::active();
  const std::size_t m = 2 * n_;
  double* yd = reinterpret_cast<double*>(y.data());

  rhs(t0, y, k_[0]);
  ++stats_.rhs_calls;
  double h = h_ > 0.0 ? std::min(h_, options_.max_step) : initial_step(rhs, t0, t1, y);
  double t = t0;
  bool last_rejected = false;
  std::size_t steps = 0;

  auto stage = [&](std::initializer_list<std::pair<int, double>> terms, double ts, int out) {
    std::copy(y.begin(), y.end(), tmp_.begin());
    for (auto [idx, coeff] : terms)
      if (coeff != 0.0) kt.axpy(m, h * coeff, dbl(k_[idx]), dbl(tmp_));
    rhs(ts, tmp_, k_[out]);
    ++stats_.rhs_calls;
  };

  while (t < t1) {
    if (++steps > options_.max_steps)
      throw IntegratorError("step budget exhausted at t = " + std::to_string(t));
    const bool final_step = t + 1.01 * h >= t1;
    if (final_step) h = t1 - t;

    stage({{0, a21}}, t + c2 * h, 1);
    stage({{0, a31}, {1, a32}}, t + c3 * h, 2);
    stage({{0, a41}, {1, a42}, {2, a43}}, t + c4 * h, 3);
    stage({{0, a51}, {1, a52}, {2, a53}, {3, a54}}, t + c5 * h, 4);
    stage({{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}}, t + h, 5);

    std::copy(y.begin(), y.end(), y_new_.begin());
    kt.axpy(m, h * b1, dbl(k_[0]), dbl(y_new_));
    kt.axpy(m, h * b3, dbl(k_[2]), dbl(y_new_));
    kt.axpy(m, h * b4, dbl(k_[3]), dbl(y_new_));
    kt.axpy(m, h * b5, dbl(k_[4]), dbl(y_new_));
    kt.axpy(m, h * b6, dbl(k_[5]), dbl(y_new_));
    const double t_new = final_step ? t1 : t + h;
    rhs(t_new, y_new_, k_[6]);
    ++stats_.rhs_calls;

    std::fill(err_.begin(), err_.end(), cplx{});
    kt.axpy(m, h * e1, dbl(k_[0]), dbl(err_));
    kt.axpy(m, h * e3, dbl(k_[2]), dbl(err_));
    kt.axpy(m, h * e4, dbl(k_[3]), dbl(err_));
    kt.axpy(m, h * e5, dbl(k_[4]), dbl(err_));
    kt.axpy(m, h * e6, dbl(k_[5]), dbl(err_));
    kt.axpy(m, h * e7, dbl(k_[6]), dbl(err_));
    const double err = kt.scaled_max_error(m, dbl(err_), yd, dbl(y_new_), options_.atol, options_.rtol);

    if (err <= 1.0) {
      std::copy(y_new_.begin(), y_new_.end(), y.begin());
      std::swap(k_[0], k_[6]);
      t = t_new;
      ++stats_.accepted;
      double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h = std::min(h * fac, options_.max_step);
      if (!final_step) h_ = h;
      last_rejected = false;
    } else {
      ++stats_.rejected;
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      h *= fac;
      last_rejected = true;
      if (h < options_.min_step)
        throw IntegratorError("step size fell below " + std::to_string(options_.min_step) +
                              " at t = " + std::to_string(t) + " (error estimate " +
                              std::to_string(err) + ")");
    }
  }
  if (h_ == 0.0) h_ = h;
}

}  // namespace cqed
