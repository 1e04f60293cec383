#include <algorithm>
#include <cmath>
#include <numbers>

#include "cqed/analysis.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"

namespace cqed {
namespace {

double relative_leakage(const SystemParams& p, cplx ce0, cplx c10, double total, double t) {
  const auto c = propagate_single_excitation(p, t, ce0, c10);
  return cavity_emission_probability(p, c.excited, c.photon) / total;
}

}  // namespace

SpectrumData output_spectrum(const SystemParams& params, cplx excited0, cplx photon0,
                             const SpectrumOptions& o) {
  params.validate();
  if (!(params.kappa > 0.0)) throw InputError("output spectrum needs kappa > 0");
  if (!(o.leakage_bound > 0.0) || o.padding < 1) throw InputError("invalid spectrum options");
  const double total = cavity_emission_probability(params, excited0, photon0);
  if (!(total > 0.0)) throw InputError("initial state emits nothing through the cavity");

  // Shortest duration meeting the leakage bound; the leakage is a tail
  // integral of a non-negative flux, hence monotone in the duration.
  double required = 0.0;
  {
    double hi = 0.01;
    while (relative_leakage(params, excited0, photon0, total, hi) > o.leakage_bound) {
      hi *= 2.0;
      if (hi > 1e4) throw NumericalError("emission does not decay within 10^4 us");
    }
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (relative_leakage(params, excited0, photon0, total, mid) > o.leakage_bound ? lo : hi) = mid;
    }
    required = hi;
  }
  double duration = required;
  if (o.duration > 0.0) {
    if (relative_leakage(params, excited0, photon0, total, o.duration) > o.leakage_bound)
      throw InputError("spectrum duration " + std::to_string(o.duration) + " us leaks more than " +
                       std::to_string(o.leakage_bound) + "; needs at least " + std::to_string(required) + " us");
    duration = o.duration;
  }

  SpectrumData s;
  s.duration = duration;
  s.emission_probability = total;
  s.leakage = relative_leakage(params, excited0, photon0, total, duration);

  const auto modes = single_excitation_modes(params);
  double scale = 0.0;
  for (const auto& l : modes.eigenvalues) scale = std::max(scale, std::abs(l));
  scale = std::max({scale, params.kappa, params.g});
  const double span = 200.0 * scale;
  const double dw = 2.0 * std::numbers::pi / (o.padding * duration);
  const auto half = static_cast<long>(std::ceil(span / dw));

  Eigen::Matrix2cd m;
  m << cplx(-params.gamma, -params.delta_ac), cplx(0.0, -params.g), cplx(0.0, -params.g), cplx(-params.kappa, 0.0);
  const Eigen::Vector2cd c0(excited0, photon0);
  const auto end = propagate_single_excitation(params, duration, excited0, photon0);
  const Eigen::Vector2cd c_end(end.excited, end.photon);
  const double amp = std::sqrt(2.0 * params.kappa);

  s.omega.reserve(static_cast<std::size_t>(2 * half + 1));
  s.density.reserve(s.omega.capacity());
  for (long k = -half; k <= half; ++k) {
    const double w = static_cast<double>(k) * dw;
    const Eigen::Matrix2cd a = m + cplx(0.0, w) * Eigen::Matrix2cd::Identity();
    const Eigen::Vector2cd rhs = std::polar(1.0, w * duration) * c_end - c0;
    const cplx f = amp * a.partialPivLu().solve(rhs)(1);
    s.omega.push_back(w);
    s.density.push_back(std::norm(f) / (2.0 * std::numbers::pi));
  }

  double sum = 0.0;
  for (double d : s.density) sum += d * dw;
  // Endpoint discontinuities give |F|^2 ~ |f|^2 / w^2 beyond the grid.
  const double edge = std::norm(amp * c0(1)) + std::norm(amp * c_end(1));
  s.integral = sum + edge / (std::numbers::pi * (static_cast<double>(half) + 0.5) * dw);

  const double peak_max = *std::max_element(s.density.begin(), s.density.end());
  std::vector<std::pair<double, double>> found;  // (height, position)
  for (std::size_t i = 1; i + 1 < s.density.size(); ++i) {
    const double y0 = s.density[i - 1], y1 = s.density[i], y2 = s.density[i + 1];
    if (!(y1 > y0 && y1 >= y2) || y1 < 1e-3 * peak_max) continue;
    const double denom = y0 - 2.0 * y1 + y2;
    const double delta = denom < 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    found.emplace_back(y1, s.omega[i] + delta * dw);
  }
  for (const auto& f : found) s.peaks.push_back(f.second);
  std::sort(s.peaks.begin(), s.peaks.end());
  if (found.size() >= 2) {
    std::partial_sort(found.begin(), found.begin() + 2, found.end(), std::greater<>());
    s.separation = std::abs(found[0].second - found[1].second);
  }
  return s;
}

}  // namespace cqed
