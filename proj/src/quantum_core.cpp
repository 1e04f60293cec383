#include "cqed/quantum_core.hpp"

#include <cmath>
#include <string>

#include "cqed/errors.hpp"
#include "cqed/units.hpp"

namespace cqed {

SystemParams SystemParams::canonical() { return from_mhz(5.0, 2.7, 3.0); }

SystemParams SystemParams::from_mhz(double g_mhz, double kappa_mhz, double gamma_mhz,
                                    double delta_ac_mhz, double eta_out) {
  using units::mhz_to_angular;
  return SystemParams{mhz_to_angular(g_mhz), mhz_to_angular(kappa_mhz),
                      mhz_to_angular(gamma_mhz), mhz_to_angular(delta_ac_mhz), eta_out};
}

void SystemParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(g) || !finite(kappa) || !finite(gamma) || !finite(delta_ac) || !finite(eta_out))
    throw InputError("system parameters must be finite");
  if (g < 0.0) throw InputError("coupling g must be >= 0");
  if (kappa < 0.0) throw InputError("cavity decay kappa must be >= 0");
  if (gamma < 0.0) throw InputError("atomic decay gamma must be >= 0");
  if (eta_out < 0.0 || eta_out > 1.0) throw InputError("eta_out must lie in [0, 1]");
}

void HilbertConfig::validate() const {
  if (n_max < 1) throw InputError("Fock cutoff n_max must be >= 1");
  if (n_max > 32) throw InputError("Fock cutoff n_max > 32 is not supported by the dense backend");
}

namespace {

Matrix zeros(const HilbertConfig& cfg) { return Matrix::Zero(cfg.dim(), cfg.dim()); }

}  // namespace

Operator annihilation(const HilbertConfig& cfg) {
  Matrix m = zeros(cfg);
  for (int atom = 0; atom < 2; ++atom)
    for (int n = 1; n <= cfg.n_max; ++n)
      m(cfg.index(atom, n - 1), cfg.index(atom, n)) = std::sqrt(static_cast<double>(n));
  return {"a", m};
}

Operator creation(const HilbertConfig& cfg) {
  return {"a_dag", annihilation(cfg).matrix.adjoint()};
}

Operator atomic_lowering(const HilbertConfig& cfg) {
  Matrix m = zeros(cfg);
  for (int n = 0; n <= cfg.n_max; ++n) m(cfg.index(0, n), cfg.index(1, n)) = 1.0;
  return {"sigma_minus", m};
}

Operator atomic_raising(const HilbertConfig& cfg) {
  return {"sigma_plus", atomic_lowering(cfg).matrix.adjoint()};
}

Operator photon_number(const HilbertConfig& cfg) {
  Matrix m = zeros(cfg);
  for (int atom = 0; atom < 2; ++atom)
    for (int n = 0; n <= cfg.n_max; ++n) m(cfg.index(atom, n), cfg.index(atom, n)) = n;
  return {"n", m};
}

Operator excited_projector(const HilbertConfig& cfg) {
  Matrix m = zeros(cfg);
  for (int n = 0; n <= cfg.n_max; ++n) m(cfg.index(1, n), cfg.index(1, n)) = 1.0;
  return {"proj_e", m};
}

Operator identity(const HilbertConfig& cfg) {
  return {"id", Matrix::Identity(cfg.dim(), cfg.dim())};
}

QuantumState QuantumState::basis(const HilbertConfig& cfg, int atom, int n) {
  cfg.validate();
  if (atom < 0 || atom > 1 || n < 0 || n > cfg.n_max)
    throw InputError("basis state outside the truncated space");
  QuantumState s{cfg, Vector::Zero(cfg.dim())};
  s.amplitudes(cfg.index(atom, n)) = 1.0;
  return s;
}

QuantumState QuantumState::normalized() const {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw InvariantError("cannot normalize a null state");
  return {config, amplitudes / nrm};
}

double QuantumState::probability(int atom, int n) const {
  const double nrm2 = amplitudes.squaredNorm();
  if (!(nrm2 > 0.0)) throw InvariantError("probability of a null state");
  return std::norm(amplitudes(config.index(atom, n))) / nrm2;
}

DensityMatrix DensityMatrix::from_state(const QuantumState& psi) {
  const QuantumState u = psi.normalized();
  return {u.config, u.amplitudes * u.amplitudes.adjoint()};
}

void DensityMatrix::validate(double trace_tol) const {
  if (rho.rows() != config.dim() || rho.cols() != config.dim())
    throw InvariantError("density matrix dimension does not match the Hilbert space");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw InvariantError("density matrix is not Hermitian (" + std::to_string(herm) + ")");
  if (std::abs(trace() - 1.0) > trace_tol)
    throw InvariantError("density matrix trace deviates from 1 by " + std::to_string(trace() - 1.0));
  const Matrix hermitian_part = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw InvariantError("density matrix has a negative eigenvalue " +
                         std::to_string(es.eigenvalues().minCoeff()));
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::cavity_detected: return "cavity-detected";
    case Channel::cavity_loss: return "cavity-loss";
    case Channel::free_space: return "free-space";
  }
  return "?";
}

Matrix static_hamiltonian(const SystemParams& params, const HilbertConfig& cfg) {
  params.validate();
  cfg.validate();
  const Matrix a = annihilation(cfg).matrix;
  const Matrix sm = atomic_lowering(cfg).matrix;
  Matrix h = params.delta_ac * excited_projector(cfg).matrix;
  h += params.g * (a.adjoint() * sm + a * sm.adjoint());
  return h;
}

Matrix drive_operator(DrivePort port, const HilbertConfig& cfg) {
  if (port == DrivePort::transverse) {
    const Matrix sm = atomic_lowering(cfg).matrix;
    return 0.5 * (sm + sm.adjoint());
  }
  const Matrix a = annihilation(cfg).matrix;
  return a + a.adjoint();
}

Operator build_hamiltonian(const SystemParams& params, const HilbertConfig& cfg,
                           const PulseSpec* drive, double t) {
  Matrix h = static_hamiltonian(params, cfg);
  if (drive != nullptr) {
    if (!std::isfinite(t)) throw InputError("Hamiltonian requested at non-finite time");
    const double f = drive->envelope(t);
    if (f != 0.0) h += f * drive_operator(drive->port, cfg);
    if (drive->cw_background != 0.0) {
      const cplx phase = std::polar(1.0, -drive->carrier_detuning * t);
      const Matrix lower = drive->port == DrivePort::transverse
                               ? Matrix(0.5 * atomic_lowering(cfg).matrix)
                               : annihilation(cfg).matrix;
      h += drive->cw_background * (phase * lower.adjoint() + std::conj(phase) * lower);
    }
  }
  return {"H", h};
}

std::vector<CollapseOperator> collapse_operators(const SystemParams& params,
                                                 const HilbertConfig& cfg) {
  params.validate();
  cfg.validate();
  const Operator a = annihilation(cfg);
  const Operator sm = atomic_lowering(cfg);
  const double cav = 2.0 * params.kappa;
  std::vector<CollapseOperator> out;
  auto add = [&](Channel ch, double rate, const Operator& op) {
    out.push_back({ch, rate, op, std::sqrt(rate) * op.matrix});
  };
  add(Channel::cavity_detected, cav * params.eta_out, a);
  add(Channel::cavity_loss, cav * (1.0 - params.eta_out), a);
  add(Channel::free_space, 2.0 * params.gamma, sm);
  return out;
}

std::array<double, 2> single_excitation_eigenvalues(const SystemParams& params) {
  params.validate();
  // Block on (|e,0>, |g,1>): [[delta, g], [g, 0]].
  const double half = 0.5 * params.delta_ac;
  const double split = std::hypot(half, params.g);
  return {half - split, half + split};
}

}  // namespace cqed
