#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/units.hpp"

using namespace cqed;

namespace {

std::string error_of(const std::string& json) {
  try {
    scenario_from_json(json);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool close_rel(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("resonant preset") {
  const DriveScenario s = preset("resonant");
  CHECK(s.params == SystemParams::canonical());
  CHECK(s.params.delta_ac == 0.0);
  CHECK(s.pulse.shape == PulseShape::gaussian);
  CHECK(s.pulse.port == DrivePort::transverse);
  CHECK(units::us_to_ns(s.pulse.fwhm) == doctest::Approx(3.0));
  CHECK(s.initial == InitialBasisState{0, 0});
  CHECK(s.window == doctest::Approx(0.2));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("other presets") {
  CHECK(preset("free-space").params.g == 0.0);
  CHECK(preset("free-space").observed_channel == Channel::free_space);
  CHECK(units::angular_to_mhz(preset("detuned").params.delta_ac) == doctest::Approx(17.3));
  CHECK(units::angular_to_mhz(preset("detuned:-12.5").params.delta_ac) == doctest::Approx(-12.5));
  CHECK(preset("cavity-pump-empty").params.g == 0.0);
  CHECK(preset("cavity-pump-atom").pulse.port == DrivePort::cavity);
  CHECK(cavity_emission_probability(preset("stark-shifted").params) == doctest::Approx(0.2).epsilon(1e-8));
  CHECK_THROWS_WITH_AS(preset("nope"), doctest::Contains("resonant"), InputError);
  CHECK_THROWS_AS(preset("detuned:abc"), InputError);
}

TEST_CASE("presets round-trip through JSON") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const DriveScenario s = preset(name);
    CHECK(scenario_from_json(scenario_to_json(s)) == s);
    const DriveScenario m = scenario_from_json(scenario_to_json(s, FrequencyUnits::mhz_linear));
    CHECK(close_rel(m.params.g, s.params.g));
    CHECK(close_rel(m.params.kappa, s.params.kappa));
    CHECK(close_rel(m.params.delta_ac, s.params.delta_ac));
    CHECK(close_rel(m.pulse.fwhm, s.pulse.fwhm));
    CHECK(m.pulse.peak_amplitude.has_value() == s.pulse.peak_amplitude.has_value());
    CHECK(m.observed_channel == s.observed_channel);
  }
}

TEST_CASE("schema violations name the key path") {
  const std::string base = scenario_to_json(preset("resonant"));
  std::string bad = base;
  bad.replace(bad.find("\"shape\""), 7, "\"bogus\": 1, \"shape\"");
  CHECK(error_of(bad).find("$.pulse.bogus") != std::string::npos);
  CHECK(error_of("{\"name\": \"x\"}").find("$.units") != std::string::npos);
  CHECK(error_of("{").find("not valid JSON") != std::string::npos);
  std::string neg = base;
  neg.replace(neg.find("\"kappa\""), 7, "\"kappa\": -1, \"_k\"");
  CHECK_FALSE(error_of(neg).empty());
}

TEST_CASE("MHz scenario files convert to rad/us") {
  const std::string text = R"({
    "units": "MHz_linear",
    "params": {"g": 5.0, "kappa": 2.7, "gamma": 3.0, "delta_ac": 10.0},
    "pulse": {"shape": "gaussian", "fwhm_ns": 3.0, "peak_amplitude": 100.0}
  })";
  const DriveScenario s = scenario_from_json(text);
  CHECK(s.params.delta_ac == doctest::Approx(units::mhz_to_angular(10.0)));
  CHECK(*s.pulse.peak_amplitude == doctest::Approx(units::mhz_to_angular(100.0)));
  CHECK(s.pulse.fwhm == doctest::Approx(0.003));
}

TEST_CASE("pi-pulse calibration without decay follows the area theorem") {
  SystemParams p = SystemParams::canonical();
  p.g = p.kappa = p.gamma = 0.0;
  PulseSpec pulse;
  const double a = pulse_amplitude_for_excitation(1.0, pulse, p);
  pulse.peak_amplitude = a;
  CHECK(std::abs(pulse.area() / std::numbers::pi - 1.0) < 1e-6);
}

TEST_CASE("half excitation sits between the decay-free pi/2 and pi amplitudes") {
  PulseSpec pulse;
  const double a = pulse_amplitude_for_excitation(0.5, pulse, SystemParams::canonical());
  const double unit = pulse.shape_integral();
  CHECK(a > 0.5 * std::numbers::pi / unit);
  CHECK(a < std::numbers::pi / unit);
  CHECK(std::abs(post_pulse_excitation(a, pulse, SystemParams::canonical()) - 0.5) < 1e-4);
}

TEST_CASE("unreachable excitation is rejected") {
  PulseSpec pulse;
  pulse.fwhm = 0.1;
  DriveScenario s = preset("resonant");
  s.pulse = pulse;
  CHECK_THROWS_AS(pulse_amplitude_for_excitation(0.999, pulse, SystemParams::canonical()), InputError);
}

TEST_CASE("resonant preset leaves half the population excited") {
  const DriveScenario s = preset("resonant").resolved();
  REQUIRE(s.pulse.peak_amplitude.has_value());
  CHECK(std::abs(post_pulse_excitation(*s.pulse.peak_amplitude, s.pulse, s.params) - s.p_exc) < 0.02 * s.p_exc);
}

TEST_CASE("scenario validation") {
  DriveScenario s = preset("resonant");
  s.p_exc = 1.2;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = preset("resonant");
  s.window = 0.005;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = preset("resonant");
  s.initial.photons = 7;
  CHECK_THROWS_AS(s.validate(), InputError);
}

}
