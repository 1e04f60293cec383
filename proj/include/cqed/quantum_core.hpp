#pragma once

// Two-level atom coupled to a single cavity mode truncated at n_max photons.
// Basis ordering: |atom, n> -> atom * (n_max + 1) + n with atom 0 = g, 1 = e.
// All frequencies are angular (rad/us); the frame rotates at the cavity
// frequency, so the atomic projector carries the atom-cavity detuning.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "cqed/drive.hpp"

namespace cqed {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct SystemParams {
  double g = 0.0;         // atom-cavity coupling
  double kappa = 0.0;     // cavity field decay rate
  double gamma = 0.0;     // atomic polarization decay rate
  double delta_ac = 0.0;  // Stark-shifted atom minus cavity resonance
  double eta_out = 0.9;   // fraction of cavity decay leaving through the output mirror

  // (g, kappa, gamma)/2pi = (5.0, 2.7, 3.0) MHz, resonant.
  static SystemParams canonical();
  static SystemParams from_mhz(double g_mhz, double kappa_mhz, double gamma_mhz,
                               double delta_ac_mhz = 0.0, double eta_out = 0.9);

  // Throws InputError for non-finite or out-of-range values. Zero decay
  // rates are accepted so that the undamped limit stays reachable.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

struct HilbertConfig {
  int n_max = 2;

  void validate() const;
  int levels() const { return n_max + 1; }
  int dim() const { return 2 * (n_max + 1); }
  int index(int atom, int n) const { return atom * (n_max + 1) + n; }

  bool operator==(const HilbertConfig&) const = default;
};

struct Operator {
  std::string label;
  Matrix matrix;
};

Operator annihilation(const HilbertConfig& cfg);      // a
Operator creation(const HilbertConfig& cfg);          // a^dagger
Operator atomic_lowering(const HilbertConfig& cfg);   // sigma_-
Operator atomic_raising(const HilbertConfig& cfg);    // sigma_+
Operator photon_number(const HilbertConfig& cfg);     // a^dagger a
Operator excited_projector(const HilbertConfig& cfg); // |e><e| = sigma_+ sigma_-
Operator identity(const HilbertConfig& cfg);

struct QuantumState {
  HilbertConfig config;
  Vector amplitudes;

  static QuantumState basis(const HilbertConfig& cfg, int atom, int n);

  double norm() const { return amplitudes.norm(); }
  QuantumState normalized() const;
  // Probability of |atom, n> using the normalized vector.
  double probability(int atom, int n) const;
};

struct DensityMatrix {
  HilbertConfig config;
  Matrix rho;

  static DensityMatrix from_state(const QuantumState& psi);

  double trace() const { return rho.trace().real(); }
  double expectation(const Matrix& op) const { return (rho * op).trace().real(); }
  // Hermitian within 1e-12, unit trace within trace_tol, eigenvalues >= -1e-10.
  void validate(double trace_tol = 1e-9) const;
};

enum class Channel { cavity_detected = 0, cavity_loss = 1, free_space = 2 };
inline constexpr std::size_t kChannelCount = 3;
std::string_view to_string(Channel c);

struct CollapseOperator {
  Channel channel;
  double rate;      // intensity decay rate carried by this channel (1/us)
  Operator base;    // a or sigma_-
  Matrix scaled;    // sqrt(rate) * base
};

// The Hamiltonian without drive, in the cavity frame.
Matrix static_hamiltonian(const SystemParams& params, const HilbertConfig& cfg);

// The operator multiplying the real drive envelope, i.e. H_drive = f(t) * D.
// Transverse: (sigma_+ + sigma_-)/2. Cavity: a + a^dagger.
Matrix drive_operator(DrivePort port, const HilbertConfig& cfg);

// H(t) = delta_ac sigma_+sigma_- + g (a^dag sigma_- + a sigma_+) + drive.
// A null drive means no drive. The shaped pulse is zero outside its support;
// the cw background (if any) is present at every t.
Operator build_hamiltonian(const SystemParams& params, const HilbertConfig& cfg,
                           const PulseSpec* drive, double t);

// Detected cavity emission, cavity loss, free-space emission, in that order.
std::vector<CollapseOperator> collapse_operators(const SystemParams& params,
                                                 const HilbertConfig& cfg);

// Eigenvalues (ascending) of the no-drive Hamiltonian restricted to
// span{|e,0>, |g,1>}.
std::array<double, 2> single_excitation_eigenvalues(const SystemParams& params);

}  // namespace cqed
