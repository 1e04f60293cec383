#pragma once

// From jump events to detector clicks: efficiency chain, 50/50 HBT split,
// dark counts, optional dead time and timing jitter.

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cqed/dynamics.hpp"
#include "cqed/scenarios.hpp"

namespace cqed {

// Per-detector dark-count rate (counts/s) produced by calibrate_dark_rate for
// the resonant preset, default chain and 200 ns window.
inline constexpr double kDefaultDarkRate = 2029.5422554799406;

struct DetectionChain {
  double directionality = 0.9;  // applied in dynamics as the detected/loss split
  double path_and_modematch = 0.85;
  double detector_qe = 0.45;
  double dark_count_rate = kDefaultDarkRate;  // per detector, 1/s
  double hbt_split_ratio = 0.5;               // probability of routing to detector 0
  double dead_time = 0.0;                     // ns
  double jitter = 0.0;                        // ns, Gaussian sigma; 0 = off

  void validate() const;
  // Photon inside the cavity to click.
  double efficiency() const { return directionality * path_and_modematch * detector_qe; }
  // Detected-channel jump to click.
  double survival() const { return path_and_modematch * detector_qe; }

  bool operator==(const DetectionChain&) const = default;
};

enum class ClickOrigin : std::uint8_t { signal, dark };

// What estimators see.
struct Click {
  std::uint8_t detector;
  std::uint64_t pulse_index;
  double time_ns;  // since the pulse trigger
  bool operator==(const Click&) const = default;
  std::partial_ordering operator<=>(const Click& o) const {
    if (pulse_index != o.pulse_index) return pulse_index <=> o.pulse_index;
    if (time_ns != o.time_ns) return time_ns <=> o.time_ns;
    return detector <=> o.detector;
  }
};

struct ClickRecord {
  Click click;
  ClickOrigin origin;
  bool operator==(const ClickRecord&) const = default;
};

std::vector<Click> strip_tags(std::span<const ClickRecord> records);

// Jumps of one pulse; `jumps_per_pulse[i]` belongs to pulse first_pulse + i.
// Darks are drawn uniformly over [0, window_ns) per detector and pulse.
std::vector<ClickRecord> clicks_from_jumps(const std::vector<std::vector<JumpEvent>>& jumps_per_pulse,
                                           const DetectionChain& chain, double window_ns,
                                           std::uint64_t seed, std::uint64_t first_pulse = 0);

struct RunOptions {
  std::size_t shards = 1;
  std::size_t threads = 1;  // caps parallelism; does not change results
};

struct ExperimentResult {
  std::vector<ClickRecord> records;  // sorted by (pulse, time, detector)
  std::size_t n_pulses = 0;
  std::size_t two_atom_pulses = 0;
  std::size_t observed_jumps = 0;  // jumps in the scenario's observed channel
  std::array<std::size_t, kChannelCount> channel_jumps{};
  DriveScenario scenario;  // resolved (calibrated pulse)
};

// Pulses are split into `shards` contiguous blocks; shard s uses seed
// derive_seed(seed, s). Output depends on (inputs, seed, shards) only.
ExperimentResult run_pulsed_experiment(const DriveScenario& scenario, const DetectionChain& chain,
                                       std::size_t n_pulses, std::uint64_t seed,
                                       const RunOptions& run = {});

// Expected observed-channel jumps per pulse inside the window, from the
// master equation (pulse included, two-atom admixture counted).
double expected_observed_jumps(const DriveScenario& scenario);

// Dark rate (1/s per detector) at which dark-involved same-pulse coincidences
// equal `fraction` of the uncorrelated-pulse coincidence level.
double calibrate_dark_rate(const DriveScenario& scenario, const DetectionChain& chain,
                           double fraction = 0.02, double window_ns = 200.0);

// Click files. CSV header "detector,pulse_index,time_ns"; binary records are
// little-endian u8 detector, u64 pulse index, f64 time_ns with no header.
void write_clicks_csv(std::ostream& out, std::span<const Click> clicks);
void write_clicks_binary(std::ostream& out, std::span<const Click> clicks);
std::vector<Click> read_clicks_csv(std::istream& in);
std::vector<Click> read_clicks_binary(std::istream& in);
// Dispatches on the extension (.csv or .bin).
std::vector<Click> read_clicks_file(const std::string& path);

}  // namespace cqed
