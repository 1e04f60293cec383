#include "cqed/drive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cqed/errors.hpp"

namespace cqed {

std::string_view to_string(PulseShape shape) {
  switch (shape) {
    case PulseShape::gaussian: return "gaussian";
    case PulseShape::square: return "square";
    case PulseShape::table: return "table";
  }
  return "?";
}

std::string_view to_string(DrivePort port) {
  return port == DrivePort::transverse ? "transverse" : "cavity";
}

PulseShape pulse_shape_from_string(std::string_view s) {
  if (s == "gaussian") return PulseShape::gaussian;
  if (s == "square") return PulseShape::square;
  if (s == "table") return PulseShape::table;
  throw InputError("unknown pulse shape '" + std::string(s) + "' (gaussian | square | table)");
}

DrivePort drive_port_from_string(std::string_view s) {
  if (s == "transverse") return DrivePort::transverse;
  if (s == "cavity") return DrivePort::cavity;
  throw InputError("unknown drive port '" + std::string(s) + "' (transverse | cavity)");
}

void PulseSpec::validate() const {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw InputError("pulse fwhm must be positive");
  if (!(repetition_period > 0.0) || !std::isfinite(repetition_period))
    throw InputError("pulse repetition period must be positive");
  if (peak_amplitude && (!std::isfinite(*peak_amplitude) || *peak_amplitude < 0.0))
    throw InputError("pulse peak amplitude must be finite and non-negative");
  if (!std::isfinite(carrier_detuning) || !std::isfinite(cw_background))
    throw InputError("pulse detuning and cw background must be finite");
  if (shape == PulseShape::table) {
    if (table.size() < 2) throw InputError("table pulse needs at least two samples");
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto [t, v] = table[i];
      if (!std::isfinite(t) || !std::isfinite(v) || v < 0.0 || v > 1.0)
        throw InputError("table pulse samples must be finite with amplitude in [0, 1]");
      if (i > 0 && !(t > table[i - 1].first))
        throw InputError("table pulse sample times must be strictly increasing");
    }
    if (table.front().first < 0.0) throw InputError("table pulse must start at t >= 0");
  }
}

double PulseSpec::support_begin() const {
  return shape == PulseShape::table ? table.front().first : 0.0;
}

double PulseSpec::support_end() const {
  switch (shape) {
    case PulseShape::gaussian: return 2.0 * kGaussianHalfSupport * fwhm;
    case PulseShape::square: return fwhm;
    case PulseShape::table: return table.back().first;
  }
  return 0.0;
}

double PulseSpec::center() const {
  switch (shape) {
    case PulseShape::gaussian: return kGaussianHalfSupport * fwhm;
    case PulseShape::square: return 0.5 * fwhm;
    case PulseShape::table: {
      auto it = std::max_element(table.begin(), table.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
      return it->first;
    }
  }
  return 0.0;
}

double PulseSpec::shape_at(double t) const {
  if (t < support_begin() || t > support_end()) return 0.0;
  switch (shape) {
    case PulseShape::gaussian: {
      const double x = (t - center()) / fwhm;
      return std::exp(-4.0 * std::numbers::ln2 * x * x);
    }
    case PulseShape::square: return 1.0;
    case PulseShape::table: {
      auto it = std::upper_bound(table.begin(), table.end(), t,
                                 [](double v, const auto& s) { return v < s.first; });
      if (it == table.end()) return table.back().second;
      if (it == table.begin()) return table.front().second;
      const auto& [t1, v1] = *it;
      const auto& [t0, v0] = *(it - 1);
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return 0.0;
}

double PulseSpec::shape_integral() const {
  switch (shape) {
    case PulseShape::gaussian: {
      const double c = 4.0 * std::numbers::ln2;
      return fwhm * std::sqrt(std::numbers::pi / c) * std::erf(std::sqrt(c) * kGaussianHalfSupport);
    }
    case PulseShape::square: return fwhm;
    case PulseShape::table: {
      double s = 0.0;
      for (std::size_t i = 1; i < table.size(); ++i)
        s += 0.5 * (table[i].second + table[i - 1].second) * (table[i].first - table[i - 1].first);
      return s;
    }
  }
  return 0.0;
}

double PulseSpec::amplitude() const {
  if (!peak_amplitude) throw InputError("pulse amplitude has not been resolved");
  return *peak_amplitude;
}

}  // namespace cqed
