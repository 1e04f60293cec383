#include <cmath>
#include <cstdint>

#include "cqed/analysis.hpp"
#include "cqed/errors.hpp"

namespace cqed {

G2Result g2_pulsed(std::span<const Click> clicks, double window_ns, int max_lag, std::size_t n_pulses) {
  if (!(window_ns > 0.0)) throw InputError("g2 window must be positive");
  if (max_lag < 1) throw InputError("g2 needs max_lag >= 1");
  G2Result r;
  r.window_ns = window_ns;
  for (int k = -max_lag; k <= max_lag; ++k) r.lags.push_back(k);
  const std::size_t nl = r.lags.size();
  r.coincidences.assign(nl, 0.0);
  r.rate.assign(nl, 0.0);
  r.errors.assign(nl, 0.0);
  if (clicks.empty()) {
    r.empty = true;
    r.n_pulses = n_pulses;
    r.suppression = std::nan("");
    r.suppression_error = std::nan("");
    return r;
  }

  bool seen[2] = {false, false};
  std::uint64_t last = 0;
  for (const auto& c : clicks) {
    if (c.detector > 1) throw InputError("g2 expects detector ids 0 and 1");
    seen[c.detector] = true;
    last = std::max(last, c.pulse_index);
  }
  if (!seen[0] || !seen[1]) throw InputError("g2 needs clicks from both detectors");
  if (n_pulses == 0) n_pulses = static_cast<std::size_t>(last) + 1;
  if (last >= n_pulses) throw InputError("click pulse index beyond the stated pulse count");
  r.n_pulses = n_pulses;

  std::vector<std::uint32_t> n0(n_pulses, 0), n1(n_pulses, 0);
  std::vector<std::uint64_t> active;
  for (const auto& c : clicks) {
    if (c.time_ns < 0.0 || c.time_ns >= window_ns) continue;
    auto& n = c.detector == 0 ? n0 : n1;
    if (n0[c.pulse_index] + n1[c.pulse_index] == 0) active.push_back(c.pulse_index);
    ++n[c.pulse_index];
  }
  for (std::size_t li = 0; li < nl; ++li) {
    const long k = r.lags[li];
    double sum = 0.0;
    for (std::uint64_t i : active) {
      if (n0[i] == 0) continue;
      const long j = static_cast<long>(i) + k;
      if (j < 0 || j >= static_cast<long>(n_pulses)) continue;
      sum += static_cast<double>(n0[i]) * n1[static_cast<std::size_t>(j)];
    }
    const double pairs = static_cast<double>(n_pulses) - std::abs(static_cast<double>(k));
    r.coincidences[li] = sum;
    r.rate[li] = pairs > 0.0 ? sum / pairs : 0.0;
    r.errors[li] = pairs > 0.0 ? std::sqrt(sum) / pairs : 0.0;
  }

  double side = 0.0, side_var = 0.0;
  std::size_t m = 0;
  double c0 = 0.0, e0 = 0.0;
  for (std::size_t li = 0; li < nl; ++li) {
    if (r.lags[li] == 0) {
      c0 = r.rate[li];
      e0 = r.errors[li];
      continue;
    }
    side += r.rate[li];
    side_var += r.errors[li] * r.errors[li];
    ++m;
  }
  const double mean = side / static_cast<double>(m);
  const double mean_err = std::sqrt(side_var) / static_cast<double>(m);
  if (mean > 0.0) {
    r.suppression = 1.0 - c0 / mean;
    r.suppression_error = std::hypot(e0 / mean, c0 * mean_err / (mean * mean));
  } else {
    r.suppression = std::nan("");
    r.suppression_error = std::nan("");
  }
  return r;
}

}  // namespace cqed
