#pragma once

// Simulate-then-analyze pipelines behind each figure bundle.

#include <string>
#include <string_view>
#include <vector>

#include "cqed/analysis.hpp"
#include "cqed/detection.hpp"
#include "cqed/scenarios.hpp"

namespace cqed {

struct PipelineOptions {
  std::size_t n_pulses = 100000;
  std::uint64_t seed = 42;
  RunOptions run;
  double bin_ns = 2.5;
  double window_ns = 200.0;
  DetectionChain chain;
};

struct SimulatedHistogram {
  ExperimentResult experiment;
  std::vector<Click> clicks;
  HistogramData histogram;  // raw counts
};

SimulatedHistogram simulate_histogram(const DriveScenario& scenario, const PipelineOptions& o,
                                      HistogramNorm norm = HistogramNorm::counts);

struct ChiSquare {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
};
// Pearson chi2 over bins with expectation >= 5.
ChiSquare pearson_chi_square(std::span<const double> observed, std::span<const double> expected);

// Master-equation expectation of the raw counts in each bin of sim.histogram:
// observed-channel emission x chain survival x (1 + two-atom fraction) plus darks.
std::vector<double> expected_counts(const SimulatedHistogram& sim, const PipelineOptions& o);

// Fit options matching a scenario's pulse (time origin bounds, fit start).
WavepacketFitOptions fit_options_for(const DriveScenario& scenario, double sigma_omega = 0.0);

struct SweepPoint {
  double delta_ac;  // rad/us
  FitResult fit;
  std::size_t clicks;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  HyperbolaFit hyperbola;
};

// Detuned presets at each detuning (MHz), fit_wavepacket per histogram, then
// the hyperbola. Pulse seeds are derive_seed(o.seed, index).
SweepResult detuning_sweep(const std::vector<double>& detunings_mhz, const PipelineOptions& o,
                           double sigma_omega = 0.0);

inline const std::vector<double> kSweepDetuningsMhz = {-30, -20, -10, 0, 10, 20, 30};

// Cavity-pump reconstruction next to the transverse-pump reference curves
// (master equation, resonant preset) on the same bin centres.
struct ComplementarityResult {
  SimulatedHistogram atom;
  SimulatedHistogram empty;
  DifferenceSignal difference;
  std::vector<double> transverse_excited;  // <sigma+ sigma-> at difference.t_ns
  std::vector<double> transverse_photons;  // <a^dag a> at difference.t_ns
  double deviation_excited = 0.0;          // sup-norm after peak normalization
  double deviation_photons = 0.0;
  double atom_first_minimum_ns = 0.0;
  double difference_first_maximum_ns = 0.0;
};
ComplementarityResult complementarity(const PipelineOptions& o);

// Sup-norm distance between two curves after normalizing each to its peak.
double normalized_sup_deviation(std::span<const double> a, std::span<const double> b);

// Time of the first local maximum (or minimum) of a curve, with three-point
// quadratic refinement; NaN if none.
double first_extremum(std::span<const double> t, std::span<const double> y, bool maximum);
// Time of the global maximum with the same refinement (for noisy histograms).
double global_maximum(std::span<const double> t, std::span<const double> y);

struct FigureReport {
  std::string name;
  std::vector<std::string> files;
  std::vector<std::string> summary;
};

const std::vector<std::string>& figure_names();
// Writes the CSV bundle and summary.txt into out_dir (created if missing).
FigureReport make_figure(std::string_view name, const std::string& out_dir, const PipelineOptions& o);

}  // namespace cqed
