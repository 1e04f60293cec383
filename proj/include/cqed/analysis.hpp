#pragma once

// Estimators and fits on click records and on the analytic amplitudes.
// Histogram times are in ns; frequencies and rates in rad/us.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cqed/detection.hpp"
#include "cqed/quantum_core.hpp"
#include "cqed/units.hpp"

namespace cqed {

// ---- histograms -----------------------------------------------------------

enum class HistogramNorm { counts, unit_area, per_pulse };
std::string_view to_string(HistogramNorm n);

struct HistogramData {
  std::vector<double> edges_ns;  // size bins + 1
  std::vector<double> counts;    // raw counts per bin
  std::vector<double> values;    // counts after normalization
  HistogramNorm norm = HistogramNorm::counts;
  std::size_t exposure = 0;  // pulses

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (edges_ns[i] + edges_ns[i + 1]); }
  double width(std::size_t i) const { return edges_ns[i + 1] - edges_ns[i]; }
};

// Bins [0, window) in steps of bin_ns (last bin may be shorter); both
// detectors merged. Unit-area needs at least one click in the window,
// otherwise values stay zero.
HistogramData arrival_histogram(std::span<const Click> clicks, double bin_ns, double window_ns,
                                HistogramNorm norm = HistogramNorm::counts, std::size_t exposure = 0);

// ---- g2 -------------------------------------------------------------------

struct G2Result {
  std::vector<int> lags;               // -max_lag .. max_lag
  std::vector<double> coincidences;    // raw cross-detector pair counts
  std::vector<double> rate;            // counts / (pulses - |lag|)
  std::vector<double> errors;          // Poisson, on rate
  double window_ns = 0.0;
  std::size_t n_pulses = 0;
  double suppression = 0.0;  // 1 - rate(0) / mean(rate(lag != 0))
  double suppression_error = 0.0;
  bool empty = false;  // no clicks at all
};

// n_pulses = 0 takes the highest pulse index + 1.
G2Result g2_pulsed(std::span<const Click> clicks, double window_ns, int max_lag, std::size_t n_pulses = 0);

// ---- damped-oscillation fit -----------------------------------------------

struct WavepacketFitOptions {
  double sigma_omega = units::mhz_to_angular(10.0);  // rad/us
  bool fit_sigma = false;
  double pulse_center_ns = 6.0;  // nominal excitation time
  double pulse_fwhm_ns = 3.0;    // bound on the fitted time origin
  double fit_start_ns = 12.0;    // first bin centre used
  int starts = 8;
};

struct FitResult {
  double omega_prime = 0.0;  // rad/us
  double damping = 0.0;      // Gamma_fit, 1/us
  double amplitude = 0.0;    // counts (or histogram units)
  double offset = 0.0;
  double t0_ns = 0.0;
  double sigma_omega = 0.0;  // rad/us
  bool sigma_fitted = false;
  // Parameter order: amplitude, damping, omega_prime, offset, t0_ns[, sigma_omega].
  std::vector<std::string> names;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  std::size_t dof = 0;
  double reduced_chi2 = 0.0;
  bool degenerate = false;
  std::string note;

  double error(std::size_t i) const { return std::sqrt(std::max(0.0, covariance(i, i))); }
  double omega_prime_error() const { return error(2); }
  double sigma_omega_error() const { return sigma_fitted ? error(5) : 0.0; }
};

// F(t) = A exp(-G s) (1 - exp(-sigma^2 s^2 / 2) cos(W s)) / 2 + B, s = t - t0,
// zero oscillating part for s < 0.
double wavepacket_model(double t_ns, double amplitude, double damping, double omega_prime,
                        double offset, double t0_ns, double sigma_omega);

// Fits raw histogram counts with Poisson weights max(count, 1). The prior sets
// the Omega' search range sqrt(4 g^2 + delta_ac^2) x [0.5, 1.5] and the initial
// damping kappa + gamma. Throws NumericalError if no start converges.
FitResult fit_wavepacket(const HistogramData& hist, const SystemParams& prior,
                         const WavepacketFitOptions& options = {});

struct ExponentialFit {
  double tau_ns = 0.0;
  double tau_error_ns = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double reduced_chi2 = 0.0;
};
// A exp(-(t - start)/tau) + B on bins with centre >= start_ns.
ExponentialFit fit_exponential(const HistogramData& hist, double start_ns);

// ---- hyperbola ------------------------------------------------------------

struct HyperbolaPoint {
  double delta_ac;     // rad/us
  double omega_prime;  // rad/us
  double sigma;        // rad/us
};

struct HyperbolaFit {
  double g = 0.0;
  double g_error = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;
  double reduced_chi2 = 0.0;  // NaN when dof = 0
  bool weighted = true;
  std::string warning;
};

// Weighted least squares of Omega' = sqrt(4 g^2 + delta^2) in g alone.
HyperbolaFit fit_hyperbola(std::span<const HyperbolaPoint> points);

// ---- output spectrum ------------------------------------------------------

struct SpectrumOptions {
  double leakage_bound = 1e-7;  // allowed emission beyond the time grid, relative
  double duration = 0.0;        // us; 0 picks the shortest meeting the bound
  int padding = 8;              // frequency spacing 2 pi / (padding * duration)
};

struct SpectrumData {
  std::vector<double> omega;    // rad/us, cavity frame
  std::vector<double> density;  // |FT sqrt(2 kappa) c_1|^2 / 2pi, per rad/us
  std::vector<double> peaks;    // interpolated local maxima, ascending
  double separation = 0.0;      // between the two strongest peaks (0 if < 2)
  double duration = 0.0;        // us
  double emission_probability = 0.0;  // 2 kappa int_0^inf |c_1|^2
  double integral = 0.0;        // sum density * d omega
  double leakage = 0.0;         // emission beyond the duration, relative
};

SpectrumData output_spectrum(const SystemParams& params, cplx excited0 = 1.0, cplx photon0 = 0.0,
                             const SpectrumOptions& options = {});

// ---- cavity pumping -------------------------------------------------------

struct DifferenceSignal {
  std::vector<double> t_ns;       // bin centres used
  std::vector<double> measured;   // histogram values
  std::vector<double> reference;  // N exp(-2 kappa (t - t_ref))
  std::vector<double> difference; // reference - measured
  double n0 = 0.0;
  double t_ref_ns = 0.0;
};

struct CavityPumpOptions {
  double t_ref_ns = 6.0;     // origin of the reference exponential (pulse centre)
  double start_ns = 12.0;    // first bin centre used
  std::size_t fit_bins = 6;  // early bins used to fix N
};

// D(t) = N exp(-2 kappa t) - hist(t); N from a fit y = N - b s^2 of
// hist(t) exp(2 kappa s) over the first fit_bins bins. If an empty-cavity
// histogram is supplied its binning must match hist_atom.
DifferenceSignal cavity_pump_difference(const HistogramData& hist_atom, const SystemParams& params,
                                        const CavityPumpOptions& options = {},
                                        const HistogramData* empty_reference = nullptr);

// ---- serialization --------------------------------------------------------

std::string to_json(const HistogramData& h);
std::string to_json(const G2Result& g);
std::string to_json(const FitResult& f);
std::string to_json(const ExponentialFit& f);
std::string to_json(const HyperbolaFit& f);
std::string to_json(const SpectrumData& s);
std::string to_json(const DifferenceSignal& d);
void write_csv(std::ostream& out, const HistogramData& h);
void write_csv(std::ostream& out, const SpectrumData& s);
void write_csv(std::ostream& out, const DifferenceSignal& d);

}  // namespace cqed
