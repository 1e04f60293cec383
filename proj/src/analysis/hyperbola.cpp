#include <cmath>

#include "cqed/analysis.hpp"
#include "cqed/errors.hpp"

namespace cqed {

HyperbolaFit fit_hyperbola(std::span<const HyperbolaPoint> points) {
  if (points.empty()) throw InputError("hyperbola fit needs at least one point");
  std::size_t zero_sigma = 0;
  for (const auto& p : points) {
    if (!std::isfinite(p.delta_ac) || !std::isfinite(p.omega_prime) || !std::isfinite(p.sigma))
      throw InputError("hyperbola points must be finite");
    if (p.omega_prime < 0.0) throw InputError("hyperbola points need Omega' >= 0");
    if (p.sigma < 0.0) throw InputError("hyperbola point errors must be non-negative");
    if (p.sigma == 0.0) ++zero_sigma;
  }
  HyperbolaFit r;
  if (zero_sigma == points.size()) {
    r.weighted = false;
    r.warning = "all errors are zero; fit is unweighted";
  } else if (zero_sigma > 0) {
    throw InputError("hyperbola points mix zero and non-zero errors");
  }
  auto weight = [&](const HyperbolaPoint& p) { return r.weighted ? 1.0 / (p.sigma * p.sigma) : 1.0; };

  // Start from the mean of the direct inversions.
  double g = 0.0;
  for (const auto& p : points)
    g += 0.5 * std::sqrt(std::max(0.0, p.omega_prime * p.omega_prime - p.delta_ac * p.delta_ac));
  g /= static_cast<double>(points.size());
  if (g <= 0.0) g = 1e-3;

  double info = 0.0;
  for (int it = 0; it < 100; ++it) {
    double num = 0.0;
    info = 0.0;
    for (const auto& p : points) {
      const double m = std::sqrt(4.0 * g * g + p.delta_ac * p.delta_ac);
      const double j = m > 0.0 ? 4.0 * g / m : 2.0;
      const double w = weight(p);
      num += w * j * (p.omega_prime - m);
      info += w * j * j;
    }
    if (!(info > 0.0)) throw NumericalError("hyperbola fit has no curvature in g");
    const double step = num / info;
    g = std::abs(g + step);
    if (std::abs(step) <= 1e-15 * std::max(1.0, g)) break;
  }
  double chi2 = 0.0;
  info = 0.0;
  for (const auto& p : points) {
    const double m = std::sqrt(4.0 * g * g + p.delta_ac * p.delta_ac);
    const double j = m > 0.0 ? 4.0 * g / m : 2.0;
    const double w = weight(p);
    chi2 += w * (p.omega_prime - m) * (p.omega_prime - m);
    info += w * j * j;
  }
  r.g = g;
  r.chi2 = chi2;
  r.dof = points.size() - 1;
  r.reduced_chi2 = r.dof > 0 ? chi2 / static_cast<double>(r.dof) : std::nan("");
  r.g_error = 1.0 / std::sqrt(info);
  // Without weights the scatter sets the error scale.
  if (!r.weighted) r.g_error *= r.dof > 0 ? std::sqrt(r.reduced_chi2) : 0.0;
  return r;
}

}  // namespace cqed
