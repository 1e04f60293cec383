#include "cqed/scenarios.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/units.hpp"

namespace cqed {
namespace {

using units::mhz_to_angular;

constexpr double kDefaultDetuningMhz = 17.3;
// Fraction of emissions leaving through the cavity at the Stark-shifted
// operating point (the rest goes to free space).
constexpr double kStarkCavityBranching = 0.2;
constexpr double kCavityPumpPhotons = 0.08;

DriveScenario base_scenario(std::string name) {
  DriveScenario s;
  s.name = std::move(name);
  s.params = SystemParams::canonical();
  s.hilbert = HilbertConfig{2};
  s.pulse = PulseSpec{};
  s.initial = {0, 0};
  s.p_exc = 0.5;
  return s;
}

DriveScenario cavity_pump(std::string name, double g) {
  DriveScenario s = base_scenario(std::move(name));
  s.params.g = g;
  s.hilbert = HilbertConfig{3};
  s.pulse.port = DrivePort::cavity;
  s.pulse.peak_amplitude = cavity_amplitude_for_photons(kCavityPumpPhotons, s.pulse);
  s.p_exc = 0.0;
  return s;
}

double parse_mhz(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    throw InputError("cannot parse detuning '" + std::string(text) + "' (MHz)");
  return v;
}

}  // namespace

void DriveScenario::validate() const {
  params.validate();
  hilbert.validate();
  pulse.validate();
  if (!(p_exc >= 0.0 && p_exc <= 1.0)) throw InputError("p_exc must lie in [0, 1]");
  if (!(two_atom_fraction >= 0.0 && two_atom_fraction <= 1.0))
    throw InputError("two_atom_fraction must lie in [0, 1]");
  if (!(window > 0.0) || !std::isfinite(window)) throw InputError("photon window must be positive");
  if (!(pulse.repetition_period > window))
    throw InputError("repetition period must exceed the photon window");
  if (pulse.support_end() >= window) throw InputError("pulse support must end inside the photon window");
  if (initial.atom < 0 || initial.atom > 1 || initial.photons < 0 || initial.photons > hilbert.n_max)
    throw InputError("initial state outside the truncated space");
  if (pulse.port == DrivePort::cavity && !pulse.peak_amplitude)
    throw InputError("cavity-port pulses need an explicit peak amplitude");
}

QuantumState DriveScenario::initial_state() const {
  return QuantumState::basis(hilbert, initial.atom, initial.photons);
}

DriveScenario DriveScenario::resolved() const {
  validate();
  DriveScenario out = *this;
  if (!out.pulse.peak_amplitude)
    out.pulse.peak_amplitude = pulse_amplitude_for_excitation(p_exc, pulse, params, hilbert);
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "resonant", "detuned", "free-space", "cavity-pump-empty", "cavity-pump-atom", "stark-shifted"};
  return names;
}

DriveScenario detuned_preset(double delta_ac) {
  DriveScenario s = base_scenario("detuned");
  s.params.delta_ac = delta_ac;
  return s;
}

DriveScenario preset(std::string_view name) {
  if (name == "resonant") return base_scenario("resonant");
  if (name == "detuned") return detuned_preset(mhz_to_angular(kDefaultDetuningMhz));
  if (name.starts_with("detuned:")) return detuned_preset(mhz_to_angular(parse_mhz(name.substr(8))));
  if (name == "free-space") {
    DriveScenario s = base_scenario("free-space");
    s.params.g = 0.0;
    s.observed_channel = Channel::free_space;
    return s;
  }
  if (name == "cavity-pump-empty") return cavity_pump("cavity-pump-empty", 0.0);
  if (name == "cavity-pump-atom") return cavity_pump("cavity-pump-atom", SystemParams::canonical().g);
  if (name == "stark-shifted") {
    DriveScenario s = base_scenario("stark-shifted");
    // Delta_S = Delta_cav = 80 MHz, Delta_pulse = 50 MHz: atom on cavity
    // resonance, pulse carrier 30 MHz below it.
    s.params.delta_ac = 0.0;
    s.params.g = coupling_for_cavity_branching(kStarkCavityBranching, s.params);
    s.pulse.carrier_detuning = mhz_to_angular(-30.0);
    return s;
  }
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw InputError("unknown preset '" + std::string(name) + "'; valid presets: " + list +
                   " (detuned accepts detuned:<MHz>)");
}

double post_pulse_excitation(double amplitude, const PulseSpec& pulse, const SystemParams& params,
                             const HilbertConfig& cfg) {
  PulseSpec p = pulse;
  p.peak_amplitude = amplitude;
  const double end = p.support_end();
  MasterOptions opt;
  opt.dt_output = end;
  opt.ode.rtol = 1e-12;
  opt.ode.atol = 1e-14;
  opt.truncation_threshold = 1.0;
  const auto rho0 = DensityMatrix::from_state(QuantumState::basis(cfg, 0, 0));
  return evolve_master(rho0, params, &p, 0.0, end, opt).excited_population.back();
}

double pulse_amplitude_for_excitation(double target, const PulseSpec& pulse,
                                      const SystemParams& params, const HilbertConfig& cfg) {
  if (!(target >= 0.0 && target <= 1.0)) throw InputError("target excitation must lie in [0, 1]");
  if (pulse.port != DrivePort::transverse)
    throw InputError("excitation calibration needs a transverse pulse");
  pulse.validate();
  params.validate();
  if (target == 0.0) return 0.0;

  auto f = [&](double a) { return post_pulse_excitation(a, pulse, params, cfg); };
  const double a_pi = std::numbers::pi / pulse.shape_integral();

  // Walk up the first flop until the excitation turns over.
  const double step = 0.1 * a_pi;
  double a_prev = 0.0, p_prev = 0.0;
  double a_cur = step, p_cur = f(a_cur);
  bool found = false;
  for (int k = 2; k <= 40; ++k) {
    const double a_next = k * step;
    const double p_next = f(a_next);
    if (p_next < p_cur) {
      found = true;
      break;
    }
    a_prev = a_cur;
    p_prev = p_cur;
    a_cur = a_next;
    p_cur = p_next;
  }
  (void)p_prev;
  if (!found) {
    // Still rising at 4 pi area (strongly damped drive): the scan range is the flop.
    if (target > p_cur)
      throw InputError("excitation " + std::to_string(target) + " unreachable; at most " + std::to_string(p_cur) +
                       " up to 4 pi pulse area");
    boost::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        [&](double a) { return f(a) - target; }, 0.0, a_cur, -target, p_cur - target,
        boost::math::tools::eps_tolerance<double>(45), iters);
    return 0.5 * (lo + hi);
  }

  auto neg = [&](double a) { return -f(a); };
  const auto [a_brent, neg_p] = boost::math::tools::brent_find_minima(neg, a_prev, a_cur + step, 30);
  // Symmetric parabola through three close samples removes Brent's sqrt(eps) floor.
  const double h = 1e-3 * a_brent;
  const double pm = f(a_brent - h), p0 = -neg_p, pp = f(a_brent + h);
  const double curv = pp - 2.0 * p0 + pm;
  double a_max = a_brent;
  if (curv < 0.0) a_max = a_brent - 0.5 * h * (pp - pm) / curv;
  const double p_max = f(a_max);

  if (target > p_max + 1e-9)
    throw InputError("excitation " + std::to_string(target) + " unreachable; the first Rabi flop peaks at " +
                     std::to_string(p_max));
  if (target >= p_max - 1e-12) return a_max;

  boost::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      [&](double a) { return f(a) - target; }, 0.0, a_max, -target, p_max - target,
      boost::math::tools::eps_tolerance<double>(45), iters);
  return 0.5 * (lo + hi);
}

double coupling_for_cavity_branching(double target, const SystemParams& params) {
  params.validate();
  auto branching = [&](double g) {
    SystemParams p = params;
    p.g = g;
    return cavity_emission_probability(p);
  };
  const double limit = params.kappa / (params.kappa + params.gamma);
  if (!(target > 0.0) || !(target < limit))
    throw InputError("cavity branching must lie in (0, kappa / (kappa + gamma))");
  double hi = std::max(params.g, 1.0);
  while (branching(hi) < target) hi *= 2.0;
  boost::uintmax_t iters = 200;
  const auto [lo, up] = boost::math::tools::toms748_solve(
      [&](double g) { return branching(g) - target; }, 0.0, hi,
      boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (lo + up);
}

double cavity_amplitude_for_photons(double mean_photons, const PulseSpec& pulse) {
  if (!(mean_photons >= 0.0)) throw InputError("mean photon number must be non-negative");
  // Coherent amplitude alpha = -i * integral of eta(t) for a short pulse.
  return std::sqrt(mean_photons) / pulse.shape_integral();
}

}  // namespace cqed
