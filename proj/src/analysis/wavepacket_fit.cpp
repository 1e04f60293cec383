#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cqed/analysis.hpp"
#include "cqed/errors.hpp"

namespace cqed {
namespace {

struct Binned {
  std::vector<double> lo, hi, y, w;  // w = 1 / sigma
};

Binned select_bins(const HistogramData& h, double start_ns) {
  Binned b;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.center(i) < start_ns || h.width(i) <= 0.0) continue;
    b.lo.push_back(h.edges_ns[i]);
    b.hi.push_back(h.edges_ns[i + 1]);
    b.y.push_back(h.counts[i]);
    b.w.push_back(1.0 / std::sqrt(std::max(h.counts[i], 1.0)));
  }
  return b;
}

// Simpson average of f over [a, b].
template <class F>
double bin_average(F&& f, double a, double b) {
  return (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)) / 6.0;
}

// Residual functor on an unconstrained parameter vector; `map` turns it into
// physical parameters and `model` evaluates one bin.
struct Residuals : Eigen::DenseFunctor<double> {
  using Map = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Model = std::function<double(const Eigen::VectorXd&, double, double)>;

  Residuals(const Binned& bins, Map map, Model model, int n)
      : DenseFunctor<double>(n, static_cast<int>(bins.y.size())), b(bins), to_phys(std::move(map)),
        f(std::move(model)) {}

  int operator()(const InputType& x, ValueType& r) const {
    const Eigen::VectorXd p = to_phys(x);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      r(i) = (f(p, b.lo[k], b.hi[k]) - b.y[k]) * b.w[k];
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& jac) const {
    ValueType rp(values()), rm(values());
    InputType xx = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      xx(j) = x(j) + h;
      (*this)(xx, rp);
      xx(j) = x(j) - h;
      (*this)(xx, rm);
      xx(j) = x(j);
      jac.col(j) = (rp - rm) / (2.0 * h);
    }
    return 0;
  }

  const Binned& b;
  Map to_phys;
  Model f;
};

double chi2_of(const Residuals& r, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(r.values());
  r(x, v);
  return v.squaredNorm();
}

// Covariance in physical parameters from the weighted Jacobian at the optimum.
Eigen::MatrixXd physical_covariance(const Binned& b, const Residuals::Model& model,
                                    const Eigen::VectorXd& p) {
  const auto n = static_cast<Eigen::Index>(b.y.size());
  Eigen::MatrixXd jac(n, p.size());
  Eigen::VectorXd q = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(1e-3, std::abs(p(j)));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      q(j) = p(j) + h;
      const double fp = model(q, b.lo[k], b.hi[k]);
      q(j) = p(j) - h;
      const double fm = model(q, b.lo[k], b.hi[k]);
      q(j) = p(j);
      jac(i, j) = (fp - fm) / (2.0 * h) * b.w[k];
    }
  }
  const Eigen::MatrixXd info = jac.transpose() * jac;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(info);
  if (cod.rank() < info.rows())
    return Eigen::MatrixXd::Constant(p.size(), p.size(), std::numeric_limits<double>::quiet_NaN());
  return cod.pseudoInverse();
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double s) { return std::log(s / (1.0 - s)); }

bool lm_converged(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  return s == RelativeReductionTooSmall || s == RelativeErrorTooSmall ||
         s == RelativeErrorAndReductionTooSmall || s == CosinusTooSmall || s == FtolTooSmall ||
         s == XtolTooSmall || s == GtolTooSmall;
}

}  // namespace

double wavepacket_model(double t_ns, double amplitude, double damping, double omega_prime,
                        double offset, double t0_ns, double sigma_omega) {
  const double s = (t_ns - t0_ns) * 1e-3;
  if (s < 0.0) return offset;
  const double smear = std::exp(-0.5 * sigma_omega * sigma_omega * s * s);
  return amplitude * std::exp(-damping * s) * 0.5 * (1.0 - smear * std::cos(omega_prime * s)) + offset;
}

FitResult fit_wavepacket(const HistogramData& hist, const SystemParams& prior,
                         const WavepacketFitOptions& o) {
  if (o.starts < 1) throw InputError("wave-packet fit needs at least one start");
  const Binned b = select_bins(hist, o.fit_start_ns);
  const auto nonempty = std::count_if(b.y.begin(), b.y.end(), [](double y) { return y > 0.0; });
  if (nonempty < 10) throw InputError("wave-packet fit needs at least 10 nonempty bins past the pulse");

  const double w_prior = std::sqrt(4.0 * prior.g * prior.g + prior.delta_ac * prior.delta_ac);
  if (!(w_prior > 0.0)) throw InputError("wave-packet fit needs a positive Omega' prior");
  const double w_lo = 0.2 * w_prior, w_hi = 3.0 * w_prior;
  const int np = o.fit_sigma ? 6 : 5;

  // Unconstrained: A, Gamma, u(Omega'), B, v(t0)[, sigma].
  auto to_phys = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd p(np);
    p(0) = x(0);
    p(1) = x(1);
    p(2) = w_lo + (w_hi - w_lo) * sigmoid(x(2));
    p(3) = x(3);
    p(4) = o.pulse_center_ns + o.pulse_fwhm_ns * std::tanh(x(4));
    if (o.fit_sigma) p(5) = std::abs(x(5));
    return p;
  };
  const double sigma_fixed = o.sigma_omega;
  Residuals::Model model = [np, sigma_fixed](const Eigen::VectorXd& p, double a, double bb) {
    const double sig = np == 6 ? p(5) : sigma_fixed;
    return bin_average([&](double t) { return wavepacket_model(t, p(0), p(1), p(2), p(3), p(4), sig); }, a, bb);
  };
  Residuals res(b, to_phys, model, np);

  struct Best {
    double chi2 = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x;
    bool converged = false;
  } best;

  for (int s = 0; s < o.starts; ++s) {
    const double frac = o.starts == 1 ? 0.5 : static_cast<double>(s) / (o.starts - 1);
    const double w0 = w_prior * (0.5 + frac);
    const double g0 = prior.kappa + prior.gamma;
    const double sig0 = sigma_fixed > 0.0 ? sigma_fixed : 0.3 * w_prior;
    // Amplitude and offset from a weighted linear solve at fixed shape.
    Eigen::MatrixXd a(b.y.size(), 2);
    Eigen::VectorXd rhs(b.y.size());
    for (std::size_t i = 0; i < b.y.size(); ++i) {
      const double shape = bin_average(
          [&](double t) { return wavepacket_model(t, 1.0, g0, w0, 0.0, o.pulse_center_ns, sig0); }, b.lo[i], b.hi[i]);
      a(static_cast<Eigen::Index>(i), 0) = shape * b.w[i];
      a(static_cast<Eigen::Index>(i), 1) = b.w[i];
      rhs(static_cast<Eigen::Index>(i)) = b.y[i] * b.w[i];
    }
    const Eigen::Vector2d ab = a.colPivHouseholderQr().solve(rhs);

    Eigen::VectorXd x(np);
    x << ab(0), g0, logit((w0 - w_lo) / (w_hi - w_lo)), ab(1), 0.0;
    if (o.fit_sigma) x(5) = sig0;
    Eigen::LevenbergMarquardt<Residuals> lm(res);
    lm.setMaxfev(4000);
    const auto status = lm.minimize(x);
    const double c2 = chi2_of(res, x);
    if (!std::isfinite(c2) || !x.allFinite()) continue;
    const double wx = to_phys(x)(2);
    const bool better = c2 < best.chi2 * (1.0 - 1e-9) ||
                        (std::abs(c2 - best.chi2) <= 1e-9 * best.chi2 && wx < to_phys(best.x)(2));
    if (better) best = {c2, x, lm_converged(status)};
  }
  if (!std::isfinite(best.chi2))
    throw NumericalError("wave-packet fit failed for every start");
  if (!best.converged)
    throw NumericalError("wave-packet fit did not converge (best chi2 " + std::to_string(best.chi2) + ")");

  const Eigen::VectorXd p = to_phys(best.x);
  FitResult r;
  r.amplitude = p(0);
  r.damping = p(1);
  r.omega_prime = p(2);
  r.offset = p(3);
  r.t0_ns = p(4);
  r.sigma_fitted = o.fit_sigma;
  r.sigma_omega = o.fit_sigma ? p(5) : sigma_fixed;
  r.names = {"amplitude", "damping", "omega_prime", "offset", "t0_ns"};
  if (o.fit_sigma) r.names.push_back("sigma_omega");
  r.covariance = physical_covariance(b, model, p);
  r.chi2 = best.chi2;
  r.dof = b.y.size() > static_cast<std::size_t>(np) ? b.y.size() - np : 0;
  r.reduced_chi2 = r.dof > 0 ? r.chi2 / static_cast<double>(r.dof) : std::nan("");

  const double span = w_hi - w_lo;
  const double werr = r.omega_prime_error();
  if (!r.covariance.allFinite()) {
    r.degenerate = true;
    r.note = "singular curvature matrix";
  } else if (r.omega_prime - w_lo < 1e-3 * span || w_hi - r.omega_prime < 1e-3 * span) {
    r.degenerate = true;
    r.note = "Omega' at its search bound";
  } else if (!(werr <= 0.5 * r.omega_prime)) {
    r.degenerate = true;
    r.note = "Omega' unconstrained by the data";
  } else if (!(std::abs(r.amplitude) > 2.0 * r.error(0))) {
    r.degenerate = true;
    r.note = "no significant oscillating component";
  }
  return r;
}

ExponentialFit fit_exponential(const HistogramData& hist, double start_ns) {
  const Binned b = select_bins(hist, start_ns);
  const auto nonempty = std::count_if(b.y.begin(), b.y.end(), [](double y) { return y > 0.0; });
  if (nonempty < 3) throw InputError("exponential fit needs at least 3 nonempty bins");
  // A, log tau, B.
  auto to_phys = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd p(3);
    p << x(0), std::exp(x(1)), x(2);
    return p;
  };
  Residuals::Model model = [start_ns](const Eigen::VectorXd& p, double a, double bb) {
    return bin_average([&](double t) { return p(0) * std::exp(-(t - start_ns) / p(1)) + p(2); }, a, bb);
  };
  Residuals res(b, to_phys, model, 3);
  // Start from a log-linear fit over the bins with counts.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = 0; i < b.y.size(); ++i) {
    if (b.y[i] <= 0.0) continue;
    const double t = 0.5 * (b.lo[i] + b.hi[i]) - start_ns, ly = std::log(b.y[i]);
    const double w = b.y[i];
    sx += w * t; sy += w * ly; sxx += w * t * t; sxy += w * t * ly; n += w;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double tau0 = slope < 0.0 ? -1.0 / slope : 0.5 * (b.hi.back() - start_ns);
  Eigen::VectorXd x(3);
  x << std::exp((sy - slope * sx) / n), std::log(tau0), 0.0;
  Eigen::LevenbergMarquardt<Residuals> lm(res);
  lm.setMaxfev(2000);
  const auto status = lm.minimize(x);
  if (!lm_converged(status) || !x.allFinite()) throw NumericalError("exponential fit did not converge");
  const Eigen::VectorXd p = to_phys(x);
  const Eigen::MatrixXd cov = physical_covariance(b, model, p);
  ExponentialFit r;
  r.amplitude = p(0);
  r.tau_ns = p(1);
  r.offset = p(2);
  r.tau_error_ns = std::sqrt(std::max(0.0, cov(1, 1)));
  const double dof = static_cast<double>(b.y.size()) - 3.0;
  r.reduced_chi2 = dof > 0 ? chi2_of(res, x) / dof : std::nan("");
  return r;
}

}  // namespace cqed
