#pragma once

// Time evolution of the atom-cavity system: Lindblad master equation,
// Monte-Carlo wave-function trajectories, and the closed-form
// single-excitation amplitudes used as an oracle for both.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cqed/ode.hpp"
#include "cqed/quantum_core.hpp"
#include "cqed/rng.hpp"

namespace cqed {

struct MasterOptions {
  double dt_output = 1e-4;  // spacing of the stored grid (us)
  OdeOptions ode{.rtol = 1e-9, .atol = 1e-12};
  double trace_tolerance = 1e-9;
  // Population allowed in |., n_max> before the run is declared truncated.
  double truncation_threshold = 1e-4;
};

struct EvolutionResult {
  std::vector<double> times;               // us
  std::vector<double> photon_number;       // <a^dag a>
  std::vector<double> excited_population;  // <sigma_+ sigma_->
  std::vector<double> detected_flux;       // 2 kappa eta_out <a^dag a>, photons/us
  // Cumulative emitted probability per Channel, at each stored time.
  std::vector<std::array<double, kChannelCount>> cumulative;
  DensityMatrix final_state;

  double remaining_excitation(std::size_t i) const {
    return photon_number[i] + excited_population[i];
  }
  double cumulative_total(std::size_t i) const {
    const auto& c = cumulative[i];
    return c[0] + c[1] + c[2];
  }
};

// Integrates d rho/dt = -i[H, rho] + sum_k D[c_k] rho over [t0, t1] with
// adaptive Dormand-Prince steps. Throws IntegratorError, TruncationError, or
// InvariantError (trace drift beyond tolerance).
EvolutionResult evolve_master(const DensityMatrix& initial, const SystemParams& params,
                              const PulseSpec* drive, double t0, double t1,
                              const MasterOptions& options = {});

// Amplitudes (c_e, c_1) of |e,0> and |g,1> at time t for the initial state
// |e,0>, no drive. Closed-form exponential of the 2x2 non-Hermitian generator;
// the coalescing-eigenvalue case uses the confluent limit.
struct SingleExcitationAmplitudes {
  cplx excited;
  cplx photon;
};
SingleExcitationAmplitudes analytic_single_excitation(const SystemParams& params, double t);

// Same generator, arbitrary initial amplitudes (c_e(0), c_1(0)).
SingleExcitationAmplitudes propagate_single_excitation(const SystemParams& params, double t,
                                                       cplx excited0, cplx photon0);

// Eigenvalues of the 2x2 single-excitation generator and the modal weights of
// c_1(t) = sum_j weight_j exp(lambda_j t) for the initial state |e,0>.
struct SingleExcitationModes {
  std::array<cplx, 2> eigenvalues;
  std::array<cplx, 2> photon_weights;
  bool degenerate;
};
SingleExcitationModes single_excitation_modes(const SystemParams& params);

// Total probability emitted through the cavity (2 kappa, both ports) starting
// from |e,0>, or from amplitudes (c_e, c_1), integrated to infinity.
double cavity_emission_probability(const SystemParams& params);
double cavity_emission_probability(const SystemParams& params, cplx excited0, cplx photon0);

struct JumpEvent {
  double time;  // us
  Channel channel;
  bool operator==(const JumpEvent&) const = default;
};

struct TrajectoryOptions {
  double window = 0.2;     // us, simulated interval [0, window]
  double dt_jump = 1e-4;   // us, resolution of jump times
  OdeOptions ode{.rtol = 1e-11, .atol = 1e-14};
};

struct Trajectory {
  std::vector<JumpEvent> jumps;
  QuantumState final_state;
};

// Monte-Carlo wave-function sampler. The no-jump propagator is tabulated on a
// grid of spacing dt_jump (blocked in powers of two) at construction; a jump is
// registered in the first grid interval where the squared norm drops below the
// drawn threshold, and its time is refined by log-linear interpolation of the
// norm inside that interval. Immutable after construction; run() is reentrant.
class TrajectorySampler {
 public:
  TrajectorySampler(const SystemParams& params, const HilbertConfig& config,
                    std::optional<PulseSpec> drive, TrajectoryOptions options = {});

  Trajectory run(const QuantumState& initial, std::uint64_t seed) const;
  Trajectory run(const QuantumState& initial, CounterRng& rng, std::uint64_t seed_for_errors = 0) const;

  // Unnormalized no-jump state at grid index k (time k * dt_jump).
  Vector no_jump_state(const QuantumState& initial, std::size_t k) const;

  std::size_t grid_steps() const { return steps_; }
  double dt() const { return options_.dt_jump; }
  const HilbertConfig& config() const { return config_; }
  const std::vector<CollapseOperator>& collapse() const { return collapse_; }

 private:
  struct Segment {
    std::size_t begin;  // global grid index
    std::size_t length; // steps
    bool constant;
    // levels[j][m] propagates steps [m 2^j, (m+1) 2^j) of this segment; a
    // constant segment stores a single block per level.
    std::vector<std::vector<Matrix>> levels;
  };

  void build_constant_segment(Segment& seg, const Matrix& h_eff) const;
  void build_driven_segment(Segment& seg) const;
  Matrix effective_hamiltonian(double t) const;

  SystemParams params_;
  HilbertConfig config_;
  std::optional<PulseSpec> drive_;
  TrajectoryOptions options_;
  std::vector<CollapseOperator> collapse_;
  Matrix h_eff_static_;
  Matrix drive_op_;
  std::size_t steps_ = 0;
  std::vector<Segment> segments_;
};

struct TwoPhotonEstimate {
  double probability;
  double standard_error;  // binomial
  std::size_t multi_photon_trajectories;
  std::size_t trajectories;
};

// Fraction of single-atom trajectories (starting in |g,0>) with at least two
// cavity-channel jumps (detected + lost) inside the window.
TwoPhotonEstimate two_photon_probability(const SystemParams& params, const PulseSpec& pulse,
                                         std::size_t n_trajectories, std::uint64_t seed,
                                         const HilbertConfig& config = {},
                                         const TrajectoryOptions& options = {});

}  // namespace cqed
