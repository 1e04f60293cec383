#include <doctest.h>

#include <cmath>

#include "cqed/errors.hpp"
#include "cqed/figures.hpp"
#include "cqed/manifest.hpp"

using namespace cqed;

TEST_SUITE("figures") {

TEST_CASE("curve helpers") {
  const std::vector<double> t = {0, 1, 2, 3, 4, 5, 6};
  const std::vector<double> y = {0, 1, 4, 1, 0, -2, 0};
  CHECK(first_extremum(t, y, true) == doctest::Approx(2.0));
  CHECK(first_extremum(t, y, false) == doctest::Approx(5.0).epsilon(0.1));
  CHECK(global_maximum(t, y) == doctest::Approx(2.0));
  const std::vector<double> flat = {1, 1, 1};
  CHECK(std::isnan(first_extremum(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 2}, true)));
  CHECK(normalized_sup_deviation(y, y) == 0.0);
  const std::vector<double> twice = {0, 2, 8, 2, 0, -4, 0};
  CHECK(normalized_sup_deviation(y, twice) == doctest::Approx(0.0));
  CHECK_THROWS_AS(normalized_sup_deviation(y, flat), InputError);
}

TEST_CASE("unknown figure names are rejected with the options") {
  CHECK_THROWS_WITH_AS(make_figure("fig7", "unused", PipelineOptions{}), doctest::Contains("fig2, fig3, fig4, fig5"),
                       InputError);
}

TEST_CASE("fit options follow the pulse") {
  const WavepacketFitOptions o = fit_options_for(preset("resonant"));
  CHECK(o.pulse_center_ns == doctest::Approx(6.0));
  CHECK(o.pulse_fwhm_ns == doctest::Approx(3.0));
  CHECK(o.fit_start_ns == doctest::Approx(12.0));
  CHECK(o.sigma_omega == 0.0);
}

TEST_CASE("detuning sweep recovers the coupling") {
  PipelineOptions o;
  o.run = {4, 4};
  const SweepResult r = detuning_sweep(kSweepDetuningsMhz, o);
  REQUIRE(r.points.size() == 7);
  CHECK(std::abs(units::angular_to_mhz(r.hyperbola.g) - 5.0) < 0.25);
}

TEST_CASE("manifest round-trips") {
  RunManifest m;
  m.scenario = preset("detuned:-20");
  m.scenario_ref = "detuned:-20";
  m.chain.dead_time = 22.0;
  m.n_pulses = 12345;
  m.seed = 18446744073709551615ull;
  m.shards = 3;
  m.outputs = {"clicks.bin"};
  const RunManifest r = manifest_from_json(manifest_to_json(m));
  CHECK(r.scenario == m.scenario);
  CHECK(r.chain == m.chain);
  CHECK(r.n_pulses == m.n_pulses);
  CHECK(r.seed == m.seed);
  CHECK(r.shards == m.shards);
  CHECK(r.outputs == m.outputs);
  CHECK_THROWS_WITH_AS(manifest_from_json("{\"seed\": 1}"), doctest::Contains("required"), InputError);
  CHECK(chain_from_json(chain_to_json(m.chain)) == m.chain);
  CHECK_THROWS_WITH_AS(chain_from_json("{\"qe\": 1}"), doctest::Contains("$.qe"), InputError);
}


TEST_CASE("simulated resonant histogram passes the chi-square test against the master equation") {
  PipelineOptions o;
  o.run = {8, 4};
  const SimulatedHistogram sim = simulate_histogram(preset("resonant"), o);
  const std::vector<double> e = expected_counts(sim, o);
  const ChiSquare c = pearson_chi_square(sim.histogram.counts, e);
  CHECK(c.dof > 40);
  CHECK(c.p_value > 1e-3);
  double total = 0.0, expect = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    total += sim.histogram.counts[i];
    expect += e[i];
  }
  CHECK(std::abs(total - expect) < 4.0 * std::sqrt(expect));
}

}
