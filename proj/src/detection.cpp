#include "cqed/detection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "cqed/errors.hpp"
#include "cqed/units.hpp"

namespace cqed {
namespace {

// Sub-stream tags so trajectory and detection draws never share a stream.
constexpr std::uint64_t kTrajectoryStream = 1;
constexpr std::uint64_t kDetectionStream = 2;
constexpr std::uint64_t kMixtureStream = 3;

void detect_pulse(const std::vector<JumpEvent>& jumps, Channel observed, const DetectionChain& chain,
                  double window_ns, std::uint64_t pulse, CounterRng& rng,
                  std::vector<ClickRecord>& out) {
  const std::size_t first = out.size();
  for (const auto& j : jumps) {
    if (j.channel != observed) continue;
    if (!rng.bernoulli(chain.survival())) continue;
    const std::uint8_t det = rng.bernoulli(chain.hbt_split_ratio) ? 0 : 1;
    out.push_back({{det, pulse, units::us_to_ns(j.time)}, ClickOrigin::signal});
  }
  const double mean_dark = chain.dark_count_rate * window_ns * 1e-9;
  if (mean_dark > 0.0) {
    for (std::uint8_t det = 0; det < 2; ++det) {
      std::poisson_distribution<int> poisson(mean_dark);
      const int n = poisson(rng);
      for (int k = 0; k < n; ++k) out.push_back({{det, pulse, rng.uniform() * window_ns}, ClickOrigin::dark});
    }
  }
  if (chain.jitter > 0.0) {
    std::normal_distribution<double> blur(0.0, chain.jitter);
    for (std::size_t i = first; i < out.size(); ++i)
      out[i].click.time_ns = std::clamp(out[i].click.time_ns + blur(rng), 0.0, window_ns);
  }
  auto begin = out.begin() + static_cast<std::ptrdiff_t>(first);
  std::sort(begin, out.end(), [](const ClickRecord& a, const ClickRecord& b) { return a.click < b.click; });
  if (chain.dead_time > 0.0) {
    double last[2] = {-1e300, -1e300};
    auto keep = std::remove_if(begin, out.end(), [&](const ClickRecord& r) {
      double& l = last[r.click.detector];
      if (r.click.time_ns - l < chain.dead_time) return true;
      l = r.click.time_ns;
      return false;
    });
    out.erase(keep, out.end());
  }
}

}  // namespace

void DetectionChain::validate() const {
  for (double f : {directionality, path_and_modematch, detector_qe, hbt_split_ratio})
    if (!(f >= 0.0 && f <= 1.0)) throw InputError("detection efficiencies and split ratio must lie in [0, 1]");
  if (!(dark_count_rate >= 0.0) || !std::isfinite(dark_count_rate))
    throw InputError("dark count rate must be finite and non-negative");
  if (!(dead_time >= 0.0) || !(jitter >= 0.0) || !std::isfinite(dead_time) || !std::isfinite(jitter))
    throw InputError("dead time and jitter must be finite and non-negative");
}

std::vector<Click> strip_tags(std::span<const ClickRecord> records) {
  std::vector<Click> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.click);
  return out;
}

std::vector<ClickRecord> clicks_from_jumps(const std::vector<std::vector<JumpEvent>>& jumps_per_pulse,
                                           const DetectionChain& chain, double window_ns,
                                           std::uint64_t seed, std::uint64_t first_pulse) {
  chain.validate();
  if (!(window_ns > 0.0)) throw InputError("detection window must be positive");
  std::vector<ClickRecord> out;
  for (std::size_t i = 0; i < jumps_per_pulse.size(); ++i) {
    const std::uint64_t pulse = first_pulse + i;
    CounterRng rng(derive_seed(seed, kDetectionStream), pulse);
    detect_pulse(jumps_per_pulse[i], Channel::cavity_detected, chain, window_ns, pulse, rng, out);
  }
  return out;
}

ExperimentResult run_pulsed_experiment(const DriveScenario& scenario, const DetectionChain& chain,
                                       std::size_t n_pulses, std::uint64_t seed, const RunOptions& run) {
  if (n_pulses == 0) throw InputError("number of pulses must be at least 1");
  if (run.shards == 0) throw InputError("shard count must be at least 1");
  chain.validate();
  ExperimentResult result;
  result.scenario = scenario.resolved();
  result.n_pulses = n_pulses;
  const DriveScenario& sc = result.scenario;
  const TrajectoryOptions topt{.window = sc.window};
  const TrajectorySampler sampler(sc.params, sc.hilbert, sc.pulse, topt);
  const QuantumState initial = sc.initial_state();
  const double window_ns = units::us_to_ns(sc.window);

  struct ShardOut {
    std::vector<ClickRecord> records;
    std::size_t two_atom = 0;
    std::array<std::size_t, kChannelCount> channels{};
  };
  const std::size_t shards = std::min(run.shards, n_pulses);
  std::vector<ShardOut> outs(shards);

  auto run_shard = [&](std::size_t s) {
    const std::uint64_t shard_seed = derive_seed(seed, s);
    const std::size_t begin = n_pulses * s / shards;
    const std::size_t end = n_pulses * (s + 1) / shards;
    ShardOut& o = outs[s];
    std::vector<JumpEvent> jumps;
    for (std::size_t p = begin; p < end; ++p) {
      CounterRng traj_rng(derive_seed(shard_seed, kTrajectoryStream), p);
      CounterRng mix_rng(derive_seed(shard_seed, kMixtureStream), p);
      CounterRng det_rng(derive_seed(shard_seed, kDetectionStream), p);
      const int atoms = mix_rng.bernoulli(sc.two_atom_fraction) ? 2 : 1;
      if (atoms == 2) ++o.two_atom;
      jumps.clear();
      for (int a = 0; a < atoms; ++a) {
        try {
          const Trajectory tr = sampler.run(initial, traj_rng, derive_seed(shard_seed, p));
          jumps.insert(jumps.end(), tr.jumps.begin(), tr.jumps.end());
        } catch (const TrajectoryError& e) {
          throw TrajectoryError("pulse " + std::to_string(p) + ": " + e.what(), e.seed());
        }
      }
      for (const auto& j : jumps) ++o.channels[static_cast<std::size_t>(j.channel)];
      detect_pulse(jumps, sc.observed_channel, chain, window_ns, p, det_rng, o.records);
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(run.threads, shards));
  if (threads == 1) {
    for (std::size_t s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::vector<std::exception_ptr> errors(shards);
    std::size_t next = 0;
    std::mutex m;
    auto worker = [&] {
      for (;;) {
        std::size_t s;
        {
          std::lock_guard lock(m);
          if (next >= shards) return;
          s = next++;
        }
        try {
          run_shard(s);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    };
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Shards cover increasing pulse ranges, so concatenation keeps the order.
  for (auto& o : outs) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.two_atom_pulses += o.two_atom;
    for (std::size_t c = 0; c < kChannelCount; ++c) result.channel_jumps[c] += o.channels[c];
  }
  result.observed_jumps = result.channel_jumps[static_cast<std::size_t>(sc.observed_channel)];
  return result;
}

double expected_observed_jumps(const DriveScenario& scenario) {
  const DriveScenario sc = scenario.resolved();
  MasterOptions opt;
  opt.dt_output = sc.window;
  const auto rho0 = DensityMatrix::from_state(sc.initial_state());
  const auto r = evolve_master(rho0, sc.params, &sc.pulse, 0.0, sc.window, opt);
  const double single = r.cumulative.back()[static_cast<std::size_t>(sc.observed_channel)];
  return (1.0 + sc.two_atom_fraction) * single;
}

double calibrate_dark_rate(const DriveScenario& scenario, const DetectionChain& chain,
                           double fraction, double window_ns) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("dark coincidence fraction must lie in (0, 1)");
  if (!(window_ns > 0.0)) throw InputError("window must be positive");
  const double clicks = expected_observed_jumps(scenario) * chain.survival();
  const double r = chain.hbt_split_ratio;
  // Signal clicks per detector and pulse (geometric mean of the two arms).
  const double s = clicks * std::sqrt(r * (1.0 - r));
  if (!(s > 0.0)) throw InputError("scenario produces no signal clicks to calibrate against");
  // Dark-involved coincidences 2 s q + q^2 = fraction (s + q)^2, x = q / s.
  const double a = 1.0 - fraction, b = 2.0 * (1.0 - fraction), c = -fraction;
  const double x = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
  return x * s / (window_ns * 1e-9);
}

}  // namespace cqed
