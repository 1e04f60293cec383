#include "cqed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"

namespace cqed {
namespace {

// Lindblad right-hand side on the flattened state [rho (column-major), P_0..P_2].
class LindbladRhs {
 public:
  LindbladRhs(const SystemParams& params, const HilbertConfig& cfg, const PulseSpec* drive)
      : d_(static_cast<std::size_t>(cfg.dim())), drive_(drive) {
    const auto ops = collapse_operators(params, cfg);
    Matrix h = static_hamiltonian(params, cfg);
    Matrix decay = Matrix::Zero(cfg.dim(), cfg.dim());
    for (const auto& c : ops) decay += c.scaled.adjoint() * c.scaled;
    h_eff_ = h - cplx(0.0, 0.5) * decay;
    if (drive_ != nullptr) {
      drive_op_ = drive_operator(drive_->port, cfg);
      if (drive_->cw_background != 0.0)
        cw_lower_ = drive_->port == DrivePort::transverse
                        ? Matrix(0.5 * atomic_lowering(cfg).matrix)
                        : annihilation(cfg).matrix;
    }
    // Both cavity channels share the operator a; evaluate the sandwich once.
    cavity_op_ = annihilation(cfg).matrix;
    cavity_dag_ = cavity_op_.adjoint();
    atom_op_ = atomic_lowering(cfg).matrix;
    atom_dag_ = atom_op_.adjoint();
    cavity_rate_ = 2.0 * params.kappa;
    eta_ = params.eta_out;
    atom_rate_ = 2.0 * params.gamma;
    heff_t_ = h_eff_;
    t1_ = Matrix::Zero(cfg.dim(), cfg.dim());
    t2_ = t1_;
  }

  std::size_t size() const { return d_ * d_ + kChannelCount; }

  void operator()(double t, std::span<const cplx> y, std::span<cplx> dy) {
    const auto& k = kernels::active();
    const std::size_t n2 = d_ * d_;
    const cplx* rho = y.data();
    cplx* drho = dy.data();

    const Matrix* heff = &h_eff_;
    if (drive_ != nullptr) {
      const double f = drive_->envelope(t);
      if (f != 0.0 || drive_->cw_background != 0.0) {
        heff_t_ = h_eff_;
        if (f != 0.0)
          k.axpy(2 * n2, f, reinterpret_cast<const double*>(drive_op_.data()),
                 reinterpret_cast<double*>(heff_t_.data()));
        if (drive_->cw_background != 0.0) {
          const cplx phase = std::polar(drive_->cw_background, -drive_->carrier_detuning * t);
          heff_t_ += phase * cw_lower_.adjoint() + std::conj(phase) * cw_lower_;
        }
        heff = &heff_t_;
      }
    }

    // T = H_eff rho; for Hermitian rho, rho H_eff^dag = T^dag.
    k.gemm(d_, heff->data(), rho, t1_.data());
    const cplx* tm = t1_.data();
    for (std::size_t j = 0; j < d_; ++j)
      for (std::size_t i = 0; i < d_; ++i)
        drho[j * d_ + i] = cplx(0.0, -1.0) * tm[j * d_ + i] + cplx(0.0, 1.0) * std::conj(tm[i * d_ + j]);

    const double cavity_pop = sandwich(cavity_op_, cavity_dag_, rho, cavity_rate_, drho);
    const double atom_pop = sandwich(atom_op_, atom_dag_, rho, atom_rate_, drho);
    drho[n2 + 0] = cavity_rate_ * eta_ * cavity_pop;
    drho[n2 + 1] = cavity_rate_ * (1.0 - eta_) * cavity_pop;
    drho[n2 + 2] = atom_rate_ * atom_pop;
  }

 private:
  // drho += rate * c rho c^dag; returns Tr(c rho c^dag).
  double sandwich(const Matrix& c, const Matrix& cdag, const cplx* rho, double rate, cplx* drho) {
    const auto& k = kernels::active();
    k.gemm(d_, c.data(), rho, t1_.data());
    k.gemm(d_, t1_.data(), cdag.data(), t2_.data());
    double tr = 0.0;
    for (std::size_t i = 0; i < d_; ++i) tr += t2_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    if (rate != 0.0)
      k.axpy(2 * d_ * d_, rate, reinterpret_cast<const double*>(t2_.data()),
             reinterpret_cast<double*>(drho));
    return tr;
  }

  std::size_t d_;
  const PulseSpec* drive_;
  Matrix h_eff_, heff_t_, drive_op_, cw_lower_;
  Matrix cavity_op_, cavity_dag_, atom_op_, atom_dag_;
  Matrix t1_, t2_;
  double cavity_rate_ = 0.0, eta_ = 1.0, atom_rate_ = 0.0;
};

cplx sinhc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sinh(z) / z;
}

struct Generator {
  cplx m11, m12, m21, m22;
};

Generator single_excitation_generator(const SystemParams& p) {
  return {cplx(-p.gamma, -p.delta_ac), cplx(0.0, -p.g), cplx(0.0, -p.g), cplx(-p.kappa, 0.0)};
}

}  // namespace

EvolutionResult evolve_master(const DensityMatrix& initial, const SystemParams& params,
                              const PulseSpec* drive, double t0, double t1,
                              const MasterOptions& options) {
  params.validate();
  initial.config.validate();
  initial.validate(1e-9);
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 >= t0))
    throw InputError("evolve_master needs a finite interval with t1 >= t0");
  if (!(options.dt_output > 0.0)) throw InputError("output spacing must be positive");
  if (drive != nullptr) drive->validate();

  const HilbertConfig& cfg = initial.config;
  const auto dim = static_cast<std::size_t>(cfg.dim());
  LindbladRhs rhs(params, cfg, drive);
  std::vector<cplx> state(rhs.size(), cplx{});
  std::copy(initial.rho.data(), initial.rho.data() + dim * dim, state.begin());

  OdeOptions ode = options.ode;
  std::vector<double> breaks;
  if (drive != nullptr && drive->peak_amplitude && *drive->peak_amplitude != 0.0) {
    for (double b : {drive->support_begin(), drive->support_end()})
      if (b > t0 && b < t1) breaks.push_back(b);
  }
  Dopri5 solver(rhs.size(), ode);
  auto f = [&rhs](double t, std::span<const cplx> y, std::span<cplx> dy) { rhs(t, y, dy); };

  const auto n_out = static_cast<std::size_t>(std::llround(std::ceil((t1 - t0) / options.dt_output - 1e-9))) + 1;
  EvolutionResult out;
  out.times.reserve(n_out);
  const Matrix number = photon_number(cfg).matrix;
  const Matrix proj_e = excited_projector(cfg).matrix;
  const double flux_rate = 2.0 * params.kappa * params.eta_out;

  auto record = [&](double t) {
    Eigen::Map<const Matrix> rho(state.data(), cfg.dim(), cfg.dim());
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > options.trace_tolerance)
      throw InvariantError("trace drifted to " + std::to_string(tr) + " at t = " + std::to_string(t));
    double top = 0.0;
    for (int atom = 0; atom < 2; ++atom)
      top += rho(cfg.index(atom, cfg.n_max), cfg.index(atom, cfg.n_max)).real();
    if (top > options.truncation_threshold)
      throw TruncationError("population " + std::to_string(top) + " in Fock level n_max = " +
                            std::to_string(cfg.n_max) + " at t = " + std::to_string(t));
    const double n = (rho * number).trace().real();
    out.times.push_back(t);
    out.photon_number.push_back(n);
    out.excited_population.push_back((rho * proj_e).trace().real());
    out.detected_flux.push_back(flux_rate * n);
    out.cumulative.push_back({state[dim * dim].real(), state[dim * dim + 1].real(),
                              state[dim * dim + 2].real()});
  };

  record(t0);
  double t = t0;
  for (std::size_t i = 1; i < n_out; ++i) {
    const double target = std::min(t1, t0 + static_cast<double>(i) * options.dt_output);
    for (double b : breaks) {
      if (b > t && b < target) {
        solver.integrate(f, t, b, state);
        solver.reset();
        t = b;
      }
    }
    solver.integrate(f, t, target, state);
    t = target;
    // Enforce exact Hermiticity against rounding drift.
    Eigen::Map<Matrix> rho(state.data(), cfg.dim(), cfg.dim());
    rho = (0.5 * (rho + rho.adjoint())).eval();
    record(t);
  }

  Eigen::Map<const Matrix> rho(state.data(), cfg.dim(), cfg.dim());
  out.final_state = DensityMatrix{cfg, rho};
  return out;
}

SingleExcitationAmplitudes propagate_single_excitation(const SystemParams& params, double t,
                                                       cplx excited0, cplx photon0) {
  params.validate();
  const Generator m = single_excitation_generator(params);
  const cplx tr = m.m11 + m.m22;
  const cplx diff = m.m11 - m.m22;
  const cplx s = std::sqrt(diff * diff + 4.0 * m.m12 * m.m21);
  // exp(M t) = e^{tr t/2} [cosh(s t/2) I + (M - tr/2 I) t sinhc(s t/2)]
  cplx ch, sh;  // e^{tr t/2} cosh(s t/2), e^{tr t/2} t sinhc(s t/2)
  const cplx half_st = 0.5 * s * t;
  if (std::abs(half_st) < 1e-4) {
    const cplx pre = std::exp(0.5 * tr * t);
    ch = pre * std::cosh(half_st);
    sh = pre * t * sinhc(half_st);
  } else {
    const cplx ep = std::exp(0.5 * (tr + s) * t);
    const cplx em = std::exp(0.5 * (tr - s) * t);
    ch = 0.5 * (ep + em);
    sh = (ep - em) / s;
  }
  const cplx u11 = ch + 0.5 * diff * sh;
  const cplx u22 = ch - 0.5 * diff * sh;
  const cplx u12 = m.m12 * sh;
  const cplx u21 = m.m21 * sh;
  return {u11 * excited0 + u12 * photon0, u21 * excited0 + u22 * photon0};
}

SingleExcitationAmplitudes analytic_single_excitation(const SystemParams& params, double t) {
  return propagate_single_excitation(params, t, 1.0, 0.0);
}

SingleExcitationModes single_excitation_modes(const SystemParams& params) {
  params.validate();
  const Generator m = single_excitation_generator(params);
  const cplx tr = m.m11 + m.m22;
  const cplx diff = m.m11 - m.m22;
  const cplx s = std::sqrt(diff * diff + 4.0 * m.m12 * m.m21);
  SingleExcitationModes out{};
  out.eigenvalues = {0.5 * (tr + s), 0.5 * (tr - s)};
  out.degenerate = std::abs(s) < 1e-12 * std::max(1.0, std::abs(tr));
  if (!out.degenerate) {
    // c_1(t) = m21 (e^{l+ t} - e^{l- t}) / s
    out.photon_weights = {m.m21 / s, -m.m21 / s};
  }
  return out;
}

double cavity_emission_probability(const SystemParams& params) {
  return cavity_emission_probability(params, 1.0, 0.0);
}

double cavity_emission_probability(const SystemParams& params, cplx excited0, cplx photon0) {
  params.validate();
  // X = int_0^inf c(t) c(t)^dag dt solves M X + X M^dag = -c0 c0^dag.
  const Generator g = single_excitation_generator(params);
  Eigen::Matrix2cd m;
  m << g.m11, g.m12, g.m21, g.m22;
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix4cd lyap;
  // vec(M X) = (I kron M) vec X; vec(X M^dag) = (conj(M) kron I) vec X.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          lyap(2 * i + k, 2 * j + l) = id(i, j) * m(k, l) + std::conj(m(i, j)) * id(k, l);
  const Eigen::Vector2cd c0(excited0, photon0);
  const Eigen::Matrix2cd cc = -c0 * c0.adjoint();
  const Eigen::Vector4cd rhs = Eigen::Map<const Eigen::Vector4cd>(cc.data());
  const Eigen::Vector4cd x = lyap.fullPivLu().solve(rhs);
  // x = vec(X) column-major: X(1,1) at index 3.
  return 2.0 * params.kappa * x(3).real();
}

}  // namespace cqed
