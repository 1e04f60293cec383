#include <doctest.h>

#include <cmath>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/units.hpp"

using namespace cqed;

namespace {

EvolutionResult free_decay(const SystemParams& p, double t1, const HilbertConfig& cfg = {}) {
  const auto rho0 = DensityMatrix::from_state(QuantumState::basis(cfg, 1, 0));
  return evolve_master(rho0, p, nullptr, 0.0, t1);
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("master-equation flux matches the closed form") {
  for (double d : {0.0, 5.0, 10.0, 20.0, 40.0}) {
    CAPTURE(d);
    const SystemParams p = SystemParams::from_mhz(5.0, 2.7, 3.0, d);
    const EvolutionResult r = free_decay(p, 0.2);
    double peak = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const double a = 2 * p.kappa * p.eta_out * std::norm(analytic_single_excitation(p, r.times[i]).photon);
      peak = std::max(peak, a);
      dev = std::max(dev, std::abs(r.detected_flux[i] - a));
    }
    CHECK(dev / peak < 1e-6);
  }
}

TEST_CASE("undamped limit gives sin^2(g t)") {
  SystemParams p = SystemParams::canonical();
  p.kappa = p.gamma = 0.0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = 0.2 * i / 999.0;
    const auto a = analytic_single_excitation(p, t);
    worst = std::max(worst, std::abs(std::norm(a.photon) - std::pow(std::sin(p.g * t), 2)));
    worst = std::max(worst, std::abs(std::norm(a.excited) - std::pow(std::cos(p.g * t), 2)));
  }
  CHECK(worst < 1e-14);
  const EvolutionResult r = free_decay(p, 0.2);
  double me = 0.0;
  for (std::size_t i = 0; i < r.times.size(); ++i)
    me = std::max(me, std::abs(r.photon_number[i] - std::pow(std::sin(p.g * r.times[i]), 2)));
  CHECK(me < 1e-7);
}

TEST_CASE("emitted probability accounts for the initial excitation") {
  const SystemParams p = SystemParams::canonical();
  const EvolutionResult r = free_decay(p, 1.0);
  CHECK(std::abs(r.cumulative_total(r.times.size() - 1) - 1.0) < 1e-6);
  for (std::size_t i = 0; i < r.times.size(); i += 97)
    CHECK(std::abs(r.cumulative_total(i) + r.remaining_excitation(i) - 1.0) < 1e-8);
  const double cav = r.cumulative.back()[0] + r.cumulative.back()[1];
  CHECK(std::abs(cav - cavity_emission_probability(p)) < 1e-6);
  CHECK(r.cumulative.back()[0] / cav == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("closed-form propagator composes") {
  const SystemParams p = SystemParams::from_mhz(5.0, 2.7, 3.0, 12.0);
  const auto a = propagate_single_excitation(p, 0.013, 0.6, cplx(0.0, 0.8));
  const auto b = propagate_single_excitation(p, 0.021, a.excited, a.photon);
  const auto c = propagate_single_excitation(p, 0.034, 0.6, cplx(0.0, 0.8));
  CHECK(std::abs(b.excited - c.excited) < 1e-13);
  CHECK(std::abs(b.photon - c.photon) < 1e-13);
}

TEST_CASE("coalescing eigenvalues use the confluent limit") {
  // kappa - gamma = 2g with delta = 0 puts the generator at its exceptional point.
  SystemParams p = SystemParams::from_mhz(1.0, 5.0, 3.0);
  const auto m = single_excitation_modes(p);
  CHECK(m.degenerate);
  const auto q = [&](double dk) {
    SystemParams s = p;
    s.kappa += dk;
    return analytic_single_excitation(s, 0.05).photon;
  };
  CHECK(std::abs(q(0.0) - q(1e-7)) < 1e-7);
  const EvolutionResult r = free_decay(p, 0.1);
  const std::size_t k = 500;
  CHECK(std::abs(r.photon_number[k] - std::norm(analytic_single_excitation(p, r.times[k]).photon)) < 1e-8);
}

TEST_CASE("cavity emission from mixed single-excitation amplitudes") {
  const SystemParams p = SystemParams::from_mhz(5.0, 2.7, 3.0, 8.0);
  const cplx ce = std::sqrt(0.3), c1 = cplx(0.0, std::sqrt(0.7));
  const HilbertConfig cfg{2};
  QuantumState psi = QuantumState::basis(cfg, 1, 0);
  psi.amplitudes(cfg.index(1, 0)) = ce;
  psi.amplitudes(cfg.index(0, 1)) = c1;
  const auto r = evolve_master(DensityMatrix::from_state(psi), p, nullptr, 0.0, 1.5);
  CHECK(std::abs(r.cumulative.back()[0] + r.cumulative.back()[1] - cavity_emission_probability(p, ce, c1)) < 1e-6);
}

TEST_CASE("driven evolution preserves the trace") {
  const DriveScenario s = preset("resonant").resolved();
  const auto r = evolve_master(DensityMatrix::from_state(s.initial_state()), s.params, &s.pulse, 0.0, 0.2);
  CHECK(std::abs(r.final_state.trace() - 1.0) < 1e-9);
  const std::size_t k = r.times.size() / 2;
  CHECK(std::abs(r.final_state.rho.trace().real() - 1.0) < 1e-9);
  CHECK(r.excited_population[k] >= 0.0);
}

TEST_CASE("photon population at the truncation edge is reported") {
  PulseSpec pulse;
  pulse.port = DrivePort::cavity;
  pulse.fwhm = 0.01;
  pulse.peak_amplitude = 2000.0;
  const HilbertConfig cfg{1};
  SystemParams p = SystemParams::canonical();
  p.g = 0.0;
  const auto rho0 = DensityMatrix::from_state(QuantumState::basis(cfg, 0, 0));
  CHECK_THROWS_AS(evolve_master(rho0, p, &pulse, 0.0, 0.05), TruncationError);
}

TEST_CASE("bad integration interval is an input error") {
  const auto rho0 = DensityMatrix::from_state(QuantumState::basis(HilbertConfig{}, 1, 0));
  CHECK_THROWS_AS(evolve_master(rho0, SystemParams::canonical(), nullptr, 0.1, 0.0), InputError);
}

}
