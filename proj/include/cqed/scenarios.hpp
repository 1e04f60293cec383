#pragma once

// Named experiment configurations and their JSON representation.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqed/drive.hpp"
#include "cqed/quantum_core.hpp"

namespace cqed {

struct InitialBasisState {
  int atom = 0;  // 0 = g, 1 = e
  int photons = 0;
  bool operator==(const InitialBasisState&) const = default;
};

struct DriveScenario {
  std::string name;
  SystemParams params;
  HilbertConfig hilbert;
  PulseSpec pulse;
  InitialBasisState initial;
  // Excitation probability left by the pulse. Used to calibrate a transverse
  // pulse whose peak amplitude is not given.
  double p_exc = 0.5;
  // Fraction of pulses that see two independent atoms.
  double two_atom_fraction = 0.0;
  // Jump channel routed to the detectors.
  Channel observed_channel = Channel::cavity_detected;
  std::size_t n_pulses = 100000;
  double window = 0.2;  // us

  void validate() const;
  QuantumState initial_state() const;
  // Copy with the pulse amplitude calibrated from p_exc if it was left open.
  DriveScenario resolved() const;

  bool operator==(const DriveScenario&) const = default;
};

// Registry names. "detuned" takes the atom-cavity detuning in linear MHz as
// "detuned:<MHz>"; bare "detuned" uses 17.3 MHz.
const std::vector<std::string>& preset_names();
DriveScenario preset(std::string_view name);
DriveScenario detuned_preset(double delta_ac);  // rad/us

// Peak amplitude (rad/us) of a transverse pulse that leaves excited population
// `target` at the end of the pulse support, starting from |g,0>. Searches the
// first Rabi flop only; throws InputError if the target exceeds its maximum.
double pulse_amplitude_for_excitation(double target, const PulseSpec& pulse,
                                      const SystemParams& params, const HilbertConfig& cfg = {});

// Excited population at the end of the pulse support for a given amplitude.
double post_pulse_excitation(double amplitude, const PulseSpec& pulse, const SystemParams& params,
                             const HilbertConfig& cfg = {});

// Coupling g giving the requested cavity emission probability from |e,0>
// with the other parameters held fixed.
double coupling_for_cavity_branching(double target, const SystemParams& params);

// Cavity-port injection amplitude giving mean intracavity photon number
// `mean_photons` in the short-pulse, empty-cavity limit.
double cavity_amplitude_for_photons(double mean_photons, const PulseSpec& pulse);

enum class FrequencyUnits { mhz_linear, rad_per_us };

std::string scenario_to_json(const DriveScenario& s, FrequencyUnits units = FrequencyUnits::rad_per_us);
// Throws InputError naming the offending key path.
DriveScenario scenario_from_json(std::string_view text);
DriveScenario load_scenario(const std::string& path);

std::string_view to_string(FrequencyUnits u);
Channel channel_from_string(std::string_view s);

}  // namespace cqed
