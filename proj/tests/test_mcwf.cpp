#include <doctest.h>

#include <cmath>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/rng.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/units.hpp"

using namespace cqed;

TEST_SUITE("mcwf") {

TEST_CASE("ground state without drive never jumps") {
  const HilbertConfig cfg{};
  const TrajectorySampler s(SystemParams::canonical(), cfg, std::nullopt);
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(s.run(QuantumState::basis(cfg, 0, 0), seed).jumps.empty());
}

TEST_CASE("decoupled atom emits into free space only") {
  SystemParams p = SystemParams::canonical();
  p.g = 0.0;
  const HilbertConfig cfg{};
  TrajectoryOptions o;
  o.window = 2.0;
  const TrajectorySampler s(p, cfg, std::nullopt, o);
  double mean = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const Trajectory t = s.run(QuantumState::basis(cfg, 1, 0), derive_seed(5, i));
    REQUIRE(t.jumps.size() == 1);
    CHECK(t.jumps[0].channel == Channel::free_space);
    mean += t.jumps[0].time / n;
  }
  const double tau = 1.0 / (2.0 * p.gamma);
  CHECK(std::abs(mean - tau) < 4.0 * tau / std::sqrt(double(n)));
}

TEST_CASE("no-jump norm equals the master-equation emission probability") {
  const SystemParams p = SystemParams::from_mhz(5.0, 2.7, 3.0, 10.0);
  const HilbertConfig cfg{};
  const TrajectorySampler s(p, cfg, std::nullopt);
  const auto psi0 = QuantumState::basis(cfg, 1, 0);
  MasterOptions mo;
  mo.dt_output = s.dt();
  const auto r = evolve_master(DensityMatrix::from_state(psi0), p, nullptr, 0.0, 0.2, mo);
  for (std::size_t k : {1u, 37u, 250u, 1024u, 2000u}) {
    CAPTURE(k);
    CHECK(std::abs(1.0 - s.no_jump_state(psi0, k).squaredNorm() - r.cumulative_total(k)) < 1e-8);
  }
}

TEST_CASE("trajectory averages agree with the master equation") {
  const DriveScenario sc = preset("resonant").resolved();
  const HilbertConfig& cfg = sc.hilbert;
  const TrajectorySampler s(sc.params, cfg, sc.pulse);
  const auto r = evolve_master(DensityMatrix::from_state(sc.initial_state()), sc.params, &sc.pulse, 0.0, 0.2);
  const int n = 20000;
  std::array<double, kChannelCount> count{};
  for (int i = 0; i < n; ++i)
    for (const auto& j : s.run(sc.initial_state(), derive_seed(11, i)).jumps) count[static_cast<int>(j.channel)] += 1;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    CAPTURE(c);
    const double expect = r.cumulative.back()[c];
    const double mean = count[c] / n;
    // Jump counts per trajectory are 0, 1 or rarely 2; binomial error is a good bound.
    CHECK(std::abs(mean - expect) < 3.0 * std::sqrt(expect * (1 - expect) / n) + 1e-4);
  }
}

TEST_CASE("trajectories are a pure function of the seed") {
  const DriveScenario sc = preset("resonant").resolved();
  const TrajectorySampler s(sc.params, sc.hilbert, sc.pulse);
  for (std::uint64_t seed : {1ull, 99ull, 123456789ull}) {
    const auto a = s.run(sc.initial_state(), seed), b = s.run(sc.initial_state(), seed);
    CHECK(a.jumps == b.jumps);
  }
}

TEST_CASE("two-photon probability") {
  const SystemParams p = SystemParams::canonical();
  PulseSpec zero;
  zero.peak_amplitude = 0.0;
  const auto z = two_photon_probability(p, zero, 2000, 3);
  CHECK(z.probability == 0.0);
  CHECK(z.multi_photon_trajectories == 0);
  CHECK_THROWS_AS(two_photon_probability(p, zero, 0, 3), InputError);

  PulseSpec short_pulse;
  short_pulse.peak_amplitude = pulse_amplitude_for_excitation(0.5, short_pulse, p);
  PulseSpec long_pulse;
  long_pulse.fwhm = 0.1;
  long_pulse.peak_amplitude = 3.0 * std::numbers::pi / long_pulse.shape_integral();
  TrajectoryOptions o;
  o.window = 0.5;
  const auto a = two_photon_probability(p, short_pulse, 100000, 17);
  const auto b = two_photon_probability(p, long_pulse, 20000, 17, {}, o);
  CHECK(b.probability > 10.0 * a.probability);
}

}
