#pragma once

// Excitation pulses. Times are in microseconds relative to the pulse trigger,
// amplitudes are angular frequencies (rad/us).

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace cqed {

enum class PulseShape { gaussian, square, table };
enum class DrivePort { transverse, cavity };

std::string_view to_string(PulseShape shape);
std::string_view to_string(DrivePort port);
PulseShape pulse_shape_from_string(std::string_view s);
DrivePort drive_port_from_string(std::string_view s);

// Gaussian pulses are truncated to [0, 2 * kGaussianHalfSupport * fwhm] and
// centred in that interval.
inline constexpr double kGaussianHalfSupport = 2.0;

struct PulseSpec {
  PulseShape shape = PulseShape::gaussian;
  double fwhm = 0.003;  // us
  // Peak Rabi frequency (transverse port) or injection amplitude (cavity
  // port). Empty means "calibrate from the scenario's excitation probability".
  std::optional<double> peak_amplitude;
  double carrier_detuning = 0.0;  // rad/us, relative to the cavity frame
  DrivePort port = DrivePort::transverse;
  double repetition_period = 1.0 / 0.67;  // us (670 kHz)
  double cw_background = 0.0;             // rad/us, leak-through amplitude
  // For PulseShape::table: (time us, relative amplitude) samples, linearly
  // interpolated, zero outside [first, last].
  std::vector<std::pair<double, double>> table;

  void validate() const;

  // Support of the shaped part of the pulse.
  double support_begin() const;
  double support_end() const;
  // Reference time of the excitation (peak of the envelope).
  double center() const;

  // Dimensionless envelope in [0, 1]; zero outside the support.
  double shape_at(double t) const;
  // Integral of shape_at over the support (us).
  double shape_integral() const;

  double amplitude() const;  // peak_amplitude or throws if unresolved
  double envelope(double t) const { return amplitude() * shape_at(t); }
  double area() const { return amplitude() * shape_integral(); }

  bool operator==(const PulseSpec&) const = default;
};

}  // namespace cqed
