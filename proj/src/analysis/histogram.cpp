#include <cmath>

#include "cqed/analysis.hpp"
#include "cqed/errors.hpp"

namespace cqed {

std::string_view to_string(HistogramNorm n) {
  switch (n) {
    case HistogramNorm::counts: return "counts";
    case HistogramNorm::unit_area: return "unit-area";
    case HistogramNorm::per_pulse: return "per-pulse";
  }
  return "?";
}

HistogramData arrival_histogram(std::span<const Click> clicks, double bin_ns, double window_ns,
                                HistogramNorm norm, std::size_t exposure) {
  if (!(bin_ns > 0.0) || !std::isfinite(bin_ns)) throw InputError("histogram bin width must be positive");
  if (!(window_ns > 0.0) || !std::isfinite(window_ns)) throw InputError("histogram window must be positive");
  if (norm == HistogramNorm::per_pulse && exposure == 0)
    throw InputError("per-pulse normalization needs the pulse count");
  HistogramData h;
  h.norm = norm;
  h.exposure = exposure;
  const auto n = static_cast<std::size_t>(std::ceil(window_ns / bin_ns - 1e-9));
  h.edges_ns.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) h.edges_ns[i] = std::min(window_ns, static_cast<double>(i) * bin_ns);
  h.counts.assign(n, 0.0);
  double total = 0.0;
  for (const auto& c : clicks) {
    if (!(c.time_ns >= 0.0) || c.time_ns >= window_ns) continue;
    const auto i = std::min(n - 1, static_cast<std::size_t>(c.time_ns / bin_ns));
    h.counts[i] += 1.0;
    total += 1.0;
  }
  h.values = h.counts;
  if (norm == HistogramNorm::unit_area && total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) h.values[i] = h.counts[i] / (total * h.width(i));
  } else if (norm == HistogramNorm::per_pulse) {
    for (auto& v : h.values) v /= static_cast<double>(exposure);
  }
  return h;
}

}  // namespace cqed
