#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"

namespace cqed {
namespace {

// Largest level j with offset % 2^j == 0 and offset + 2^j <= length.
int max_level(std::size_t offset, std::size_t length, int levels) {
  int j = offset == 0 ? levels - 1 : std::min(levels - 1, std::countr_zero(offset));
  while (j > 0 && offset + (std::size_t{1} << j) > length) --j;
  return j;
}

int level_count(std::size_t length) { return length == 0 ? 0 : std::bit_width(length); }

}  // namespace

TrajectorySampler::TrajectorySampler(const SystemParams& params, const HilbertConfig& config,
                                     std::optional<PulseSpec> drive, TrajectoryOptions options)
    : params_(params), config_(config), drive_(std::move(drive)), options_(options) {
  params_.validate();
  config_.validate();
  if (!(options_.window > 0.0) || !(options_.dt_jump > 0.0))
    throw InputError("trajectory window and jump resolution must be positive");
  const double ratio = options_.window / options_.dt_jump;
  steps_ = static_cast<std::size_t>(std::llround(ratio));
  if (steps_ == 0 || std::abs(ratio - static_cast<double>(steps_)) > 1e-6)
    throw InputError("trajectory window must be a whole number of jump steps");

  collapse_ = collapse_operators(params_, config_);
  Matrix decay = Matrix::Zero(config_.dim(), config_.dim());
  for (const auto& c : collapse_) decay += c.scaled.adjoint() * c.scaled;
  h_eff_static_ = static_hamiltonian(params_, config_) - cplx(0.0, 0.5) * decay;

  bool pulsed = false;
  if (drive_) {
    drive_->validate();
    drive_op_ = drive_operator(drive_->port, config_);
    pulsed = drive_->amplitude() != 0.0 || drive_->cw_background != 0.0;
  }
  if (!pulsed) {
    Segment seg{0, steps_, true, {}};
    build_constant_segment(seg, h_eff_static_);
    segments_.push_back(std::move(seg));
    return;
  }

  std::size_t d_begin = 0, d_end = steps_;
  if (drive_->cw_background == 0.0) {
    const double b = std::max(0.0, drive_->support_begin());
    const double e = std::min(options_.window, drive_->support_end());
    d_begin = std::min(steps_, static_cast<std::size_t>(std::floor(b / options_.dt_jump + 1e-9)));
    d_end = std::min(steps_, static_cast<std::size_t>(std::ceil(e / options_.dt_jump - 1e-9)));
    if (d_end <= d_begin) d_begin = d_end = 0;
  }
  if (d_begin > 0) {
    Segment seg{0, d_begin, true, {}};
    build_constant_segment(seg, h_eff_static_);
    segments_.push_back(std::move(seg));
  }
  if (d_end > d_begin) {
    Segment seg{d_begin, d_end - d_begin, false, {}};
    build_driven_segment(seg);
    segments_.push_back(std::move(seg));
  }
  if (d_end < steps_) {
    Segment seg{d_end, steps_ - d_end, true, {}};
    build_constant_segment(seg, h_eff_static_);
    segments_.push_back(std::move(seg));
  }
}

Matrix TrajectorySampler::effective_hamiltonian(double t) const {
  Matrix h = h_eff_static_;
  if (!drive_) return h;
  const double f = drive_->envelope(t);
  if (f != 0.0) h += f * drive_op_;
  if (drive_->cw_background != 0.0) {
    const Matrix lower = drive_->port == DrivePort::transverse
                             ? Matrix(0.5 * atomic_lowering(config_).matrix)
                             : annihilation(config_).matrix;
    const cplx phase = std::polar(drive_->cw_background, -drive_->carrier_detuning * t);
    h += phase * lower.adjoint() + std::conj(phase) * lower;
  }
  return h;
}

void TrajectorySampler::build_constant_segment(Segment& seg, const Matrix& h_eff) const {
  const int n = level_count(seg.length);
  seg.levels.assign(static_cast<std::size_t>(n), {});
  Matrix block = (cplx(0.0, -options_.dt_jump) * h_eff).exp();
  for (int j = 0; j < n; ++j) {
    seg.levels[static_cast<std::size_t>(j)].push_back(block);
    block = (block * block).eval();
  }
}

void TrajectorySampler::build_driven_segment(Segment& seg) const {
  const int d = config_.dim();
  const auto d2 = static_cast<std::size_t>(d * d);
  const int n = level_count(seg.length);
  seg.levels.assign(static_cast<std::size_t>(n), {});

  std::vector<double> breaks;
  if (drive_) breaks = {drive_->support_begin(), drive_->support_end()};
  Matrix h_t(d, d);
  auto rhs = [&](double t, std::span<const cplx> y, std::span<cplx> dy) {
    h_t = effective_hamiltonian(t);
    kernels::active().gemm(static_cast<std::size_t>(d), h_t.data(), y.data(), dy.data());
    for (auto& v : dy) v *= cplx(0.0, -1.0);
  };
  OdeOptions ode = options_.ode;
  if (drive_ && drive_->shape != PulseShape::square)
    ode.max_step = std::min(ode.max_step, drive_->fwhm / 8.0);
  Dopri5 solver(d2, ode);

  auto& base = seg.levels[0];
  base.reserve(seg.length);
  std::vector<cplx> u(d2);
  for (std::size_t k = 0; k < seg.length; ++k) {
    const double t0 = static_cast<double>(seg.begin + k) * options_.dt_jump;
    const double t1 = t0 + options_.dt_jump;
    Eigen::Map<Matrix> um(u.data(), d, d);
    um.setIdentity();
    double t = t0;
    for (double b : breaks) {
      if (b > t && b < t1) {
        solver.integrate(rhs, t, b, u);
        solver.reset();
        t = b;
      }
    }
    solver.integrate(rhs, t, t1, u);
    base.push_back(um);
  }
  for (int j = 1; j < n; ++j) {
    const auto& prev = seg.levels[static_cast<std::size_t>(j - 1)];
    auto& cur = seg.levels[static_cast<std::size_t>(j)];
    for (std::size_t m = 0; m + 1 < prev.size(); m += 2) cur.push_back(prev[m + 1] * prev[m]);
  }
}

Vector TrajectorySampler::no_jump_state(const QuantumState& initial, std::size_t k) const {
  if (!(initial.config == config_)) throw InputError("initial state has the wrong Hilbert space");
  if (k > steps_) throw InputError("grid index beyond the trajectory window");
  Vector psi = initial.amplitudes;
  std::size_t pos = 0;
  for (const auto& seg : segments_) {
    while (pos < k && pos < seg.begin + seg.length) {
      const std::size_t off = pos - seg.begin;
      int j = max_level(off, seg.length, static_cast<int>(seg.levels.size()));
      while (j > 0 && pos + (std::size_t{1} << j) > k) --j;
      const auto& lv = seg.levels[static_cast<std::size_t>(j)];
      psi = (seg.constant ? lv[0] : lv[off >> j]) * psi;
      pos += std::size_t{1} << j;
    }
  }
  return psi;
}

Trajectory TrajectorySampler::run(const QuantumState& initial, std::uint64_t seed) const {
  CounterRng rng(seed);
  return run(initial, rng, seed);
}

Trajectory TrajectorySampler::run(const QuantumState& initial, CounterRng& rng,
                                  std::uint64_t seed_for_errors) const {
  if (!(initial.config == config_)) throw InputError("initial state has the wrong Hilbert space");
  const auto& kt = kernels::active();
  const auto d = static_cast<std::size_t>(config_.dim());
  Trajectory out;
  Vector psi = initial.amplitudes.normalized();
  Vector next(static_cast<Eigen::Index>(d));
  double threshold = rng.uniform();
  double norm_sq = 1.0;

  std::size_t pos = 0;
  for (const auto& seg : segments_) {
    const int levels = static_cast<int>(seg.levels.size());
    const std::size_t end = seg.begin + seg.length;
    while (pos < end) {
      const std::size_t off = pos - seg.begin;
      int j = max_level(off, seg.length, levels);
      for (;;) {
        const auto& lv = seg.levels[static_cast<std::size_t>(j)];
        const Matrix& block = seg.constant ? lv[0] : lv[off >> j];
        kt.gemv(d, block.data(), psi.data(), next.data());
        const double ns = kt.norm_sq(d, next.data());
        if (!std::isfinite(ns))
          throw TrajectoryError("non-finite norm at t = " +
                                    std::to_string(static_cast<double>(pos) * options_.dt_jump),
                                seed_for_errors);
        if (ns > threshold) {
          psi.swap(next);
          norm_sq = ns;
          pos += std::size_t{1} << j;
          break;
        }
        if (j > 0) {
          --j;
          continue;
        }
        // Jump inside [pos, pos + 1]: norm decays ~exponentially across one step.
        double frac = 1.0;
        if (ns > 0.0 && norm_sq > ns)
          frac = std::clamp(std::log(norm_sq / threshold) / std::log(norm_sq / ns), 0.0, 1.0);
        const double t_jump = (static_cast<double>(pos) + frac) * options_.dt_jump;

        double total = 0.0;
        std::array<double, kChannelCount> weight{};
        std::array<Vector, kChannelCount> after;
        for (std::size_t c = 0; c < collapse_.size(); ++c) {
          after[c] = collapse_[c].scaled * next;
          weight[c] = after[c].squaredNorm();
          total += weight[c];
        }
        if (!(total > 1e-300) || !std::isfinite(total))
          throw TrajectoryError("no collapse channel available for a jump at t = " +
                                    std::to_string(t_jump),
                                seed_for_errors);
        double u = rng.uniform() * total;
        std::size_t chosen = collapse_.size() - 1;
        for (std::size_t c = 0; c < collapse_.size(); ++c) {
          if (weight[c] <= 0.0) continue;
          if (u < weight[c]) {
            chosen = c;
            break;
          }
          u -= weight[c];
        }
        while (weight[chosen] <= 0.0) --chosen;
        out.jumps.push_back({t_jump, collapse_[chosen].channel});
        psi = after[chosen] / std::sqrt(weight[chosen]);
        norm_sq = 1.0;
        threshold = rng.uniform();
        pos += 1;
        break;
      }
    }
  }
  out.final_state = QuantumState{config_, psi.normalized()};
  return out;
}

TwoPhotonEstimate two_photon_probability(const SystemParams& params, const PulseSpec& pulse,
                                         std::size_t n_trajectories, std::uint64_t seed,
                                         const HilbertConfig& config,
                                         const TrajectoryOptions& options) {
  if (n_trajectories == 0) throw InputError("two-photon estimate needs at least one trajectory");
  const TrajectorySampler sampler(params, config, pulse, options);
  const QuantumState ground = QuantumState::basis(config, 0, 0);
  std::size_t multi = 0;
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    CounterRng rng(seed, i);
    const Trajectory tr = sampler.run(ground, rng, derive_seed(seed, i));
    std::size_t cavity = 0;
    for (const auto& j : tr.jumps)
      if (j.channel != Channel::free_space) ++cavity;
    if (cavity >= 2) ++multi;
  }
  const double n = static_cast<double>(n_trajectories);
  const double p = static_cast<double>(multi) / n;
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n), multi, n_trajectories};
}

}  // namespace cqed
