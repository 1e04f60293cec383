#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cqed/detection.hpp"
#include "cqed/errors.hpp"
#include "cqed/rng.hpp"
#include "cqed/scenarios.hpp"

using namespace cqed;

namespace {

DetectionChain ideal_chain() {
  DetectionChain c;
  c.directionality = c.path_and_modematch = c.detector_qe = 1.0;
  c.dark_count_rate = 0.0;
  return c;
}

std::vector<std::vector<JumpEvent>> one_jump_each(std::size_t n) {
  std::vector<std::vector<JumpEvent>> j(n);
  for (std::size_t i = 0; i < n; ++i) j[i].push_back({0.01 + 1e-5 * static_cast<double>(i % 1000), Channel::cavity_detected});
  return j;
}

}  // namespace

TEST_SUITE("detection") {

TEST_CASE("default chain budget") {
  const DetectionChain c;
  CHECK(std::abs(c.efficiency() - 0.34) < 0.005);
  CHECK(c.survival() == doctest::Approx(0.3825));
  CHECK_NOTHROW(c.validate());
  DetectionChain bad;
  bad.detector_qe = 1.2;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("ideal chain passes every jump and splits evenly") {
  const std::size_t n = 40000;
  const auto jumps = one_jump_each(n);
  const auto rec = clicks_from_jumps(jumps, ideal_chain(), 200.0, 9);
  REQUIRE(rec.size() == n);
  std::size_t d0 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(rec[i].click.pulse_index == i);
    CHECK(rec[i].click.time_ns == doctest::Approx(1e3 * jumps[i][0].time));
    d0 += rec[i].click.detector == 0;
  }
  CHECK(std::abs(double(d0) - 0.5 * n) < 3.0 * std::sqrt(0.25 * n));
}

TEST_CASE("other channels never click") {
  std::vector<std::vector<JumpEvent>> j(100, {{0.02, Channel::free_space}, {0.03, Channel::cavity_loss}});
  CHECK(clicks_from_jumps(j, ideal_chain(), 200.0, 1).empty());
}

TEST_CASE("default chain keeps path x QE of the detected jumps") {
  DetectionChain c;
  c.dark_count_rate = 0.0;
  const std::size_t n = 100000;
  const double kept = double(clicks_from_jumps(one_jump_each(n), c, 200.0, 4).size()) / n;
  CHECK(std::abs(kept - 0.3825) < 3.0 * std::sqrt(0.3825 * 0.6175 / n));
}

TEST_CASE("dark counts alone are Poissonian") {
  DetectionChain c;
  c.dark_count_rate = 1e6;  // mean 0.2 per detector per 200 ns
  const std::size_t n = 50000;
  const auto rec = clicks_from_jumps(std::vector<std::vector<JumpEvent>>(n), c, 200.0, 21);
  std::vector<double> per(n, 0.0);
  for (const auto& r : rec) {
    CHECK(r.origin == ClickOrigin::dark);
    CHECK(r.click.time_ns >= 0.0);
    CHECK(r.click.time_ns < 200.0);
    per[r.click.pulse_index] += r.click.detector == 0;
  }
  double mean = 0.0, var = 0.0;
  for (double x : per) mean += x / n;
  for (double x : per) var += (x - mean) * (x - mean) / (n - 1);
  CHECK(std::abs(mean - 0.2) < 4.0 * std::sqrt(0.2 / n));
  // Index of dispersion: (n-1) var/mean ~ chi2(n-1), sd sqrt(2/(n-1)) on the ratio.
  CHECK(std::abs(var / mean - 1.0) < 4.0 * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("dead time removes the later click on the same detector") {
  DetectionChain c = ideal_chain();
  c.hbt_split_ratio = 1.0;
  c.dead_time = 5.0;
  std::vector<std::vector<JumpEvent>> j = {{{0.010, Channel::cavity_detected}, {0.012, Channel::cavity_detected},
                                            {0.020, Channel::cavity_detected}}};
  const auto rec = clicks_from_jumps(j, c, 200.0, 2);
  REQUIRE(rec.size() == 2);
  CHECK(rec[0].click.time_ns == doctest::Approx(10.0));
  CHECK(rec[1].click.time_ns == doctest::Approx(20.0));
}

TEST_CASE("pulsed runs are deterministic and independent of thread count") {
  DriveScenario s = preset("resonant");
  s.two_atom_fraction = 0.08;
  const DetectionChain c;
  const auto a = run_pulsed_experiment(s, c, 20000, 42, {4, 1});
  const auto b = run_pulsed_experiment(s, c, 20000, 42, {4, 4});
  CHECK(a.records == b.records);
  CHECK(a.two_atom_pulses == b.two_atom_pulses);
  CHECK(std::is_sorted(a.records.begin(), a.records.end(),
                       [](const ClickRecord& x, const ClickRecord& y) { return x.click < y.click; }));
  const auto d = run_pulsed_experiment(s, c, 20000, 43, {4, 4});
  CHECK_FALSE(a.records == d.records);
  CHECK_THROWS_AS(run_pulsed_experiment(s, c, 0, 42), InputError);
}

TEST_CASE("per-pulse signal clicks match the master equation") {
  DetectionChain c;
  c.dark_count_rate = 0.0;
  const DriveScenario s = preset("resonant");
  const std::size_t n = 100000;
  const auto r = run_pulsed_experiment(s, c, n, 7, {8, 8});
  const double p = expected_observed_jumps(s) * c.survival();
  const double measured = double(r.records.size()) / n;
  CHECK(std::abs(measured - p) < 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("default dark rate is the calibrated value") {
  const double r = calibrate_dark_rate(preset("resonant"), DetectionChain{});
  CHECK(r == doctest::Approx(kDefaultDarkRate).epsilon(1e-9));
}

TEST_CASE("click files round-trip losslessly") {
  std::vector<Click> clicks = {{0, 0, 0.0}, {1, 3, 12.345678901234567}, {0, 18446744073709551615ull, 199.99999999999997},
                               {1, 7, 1e-300}, {0, 8, 5e-324}};
  std::stringstream csv, bin;
  write_clicks_csv(csv, clicks);
  write_clicks_binary(bin, clicks);
  CHECK(read_clicks_csv(csv) == clicks);
  CHECK(read_clicks_binary(bin) == clicks);
  CHECK(bin.str().size() == 17 * clicks.size());
}

TEST_CASE("malformed click files name the bad record") {
  std::stringstream csv("detector,pulse_index,time_ns\n0,1,2.5\n1,x,3\n");
  CHECK_THROWS_WITH_AS(read_clicks_csv(csv), doctest::Contains("line 3"), InputError);
  std::stringstream hdr("a,b,c\n");
  CHECK_THROWS_AS(read_clicks_csv(hdr), InputError);
  std::vector<Click> one = {{0, 1, 2.0}};
  std::stringstream bin;
  write_clicks_binary(bin, one);
  std::stringstream cut(bin.str().substr(0, 10));
  CHECK_THROWS_AS(read_clicks_binary(cut), InputError);
}

}
