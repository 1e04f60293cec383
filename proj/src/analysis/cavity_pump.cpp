#include <cmath>

#include "cqed/analysis.hpp"
#include "cqed/errors.hpp"

namespace cqed {

DifferenceSignal cavity_pump_difference(const HistogramData& hist_atom, const SystemParams& params,
                                        const CavityPumpOptions& o, const HistogramData* empty_reference) {
  params.validate();
  if (hist_atom.bins() == 0) throw InputError("cavity-pump histogram is empty");
  if (empty_reference != nullptr && empty_reference->edges_ns != hist_atom.edges_ns)
    throw InputError("cavity-pump histograms have different binning");
  if (o.fit_bins < 2) throw InputError("cavity-pump normalization needs at least 2 bins");

  const double rate = 2.0 * params.kappa * 1e-3;  // per ns
  DifferenceSignal d;
  d.t_ref_ns = o.t_ref_ns;
  for (std::size_t i = 0; i < hist_atom.bins(); ++i) {
    if (hist_atom.center(i) < o.start_ns) continue;
    d.t_ns.push_back(hist_atom.center(i));
    d.measured.push_back(hist_atom.values[i]);
  }
  if (d.t_ns.size() < o.fit_bins) throw InputError("too few bins after the pulse for the normalization fit");

  // Undo the empty-cavity decay and extrapolate to the reference time:
  // y(s) = hist exp(2 kappa s) ~ N - b s^2 at small s.
  double s0 = 0, s2 = 0, s4 = 0, y0 = 0, y2 = 0;
  for (std::size_t i = 0; i < o.fit_bins; ++i) {
    const double s = d.t_ns[i] - o.t_ref_ns;
    const double y = d.measured[i] * std::exp(rate * s);
    const double q = s * s;
    s0 += 1; s2 += q; s4 += q * q; y0 += y; y2 += y * q;
  }
  const double det = s0 * s4 - s2 * s2;
  d.n0 = det != 0.0 ? (y0 * s4 - y2 * s2) / det : y0 / s0;

  for (std::size_t i = 0; i < d.t_ns.size(); ++i) {
    const double ref = d.n0 * std::exp(-rate * (d.t_ns[i] - o.t_ref_ns));
    d.reference.push_back(ref);
    d.difference.push_back(ref - d.measured[i]);
  }
  return d;
}

}  // namespace cqed
