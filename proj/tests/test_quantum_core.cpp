#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#include "cqed/errors.hpp"
#include "cqed/quantum_core.hpp"
#include "cqed/units.hpp"

using namespace cqed;

TEST_SUITE("quantum_core") {

TEST_CASE("ladder operators act on the basis") {
  const HilbertConfig cfg{3};
  const Matrix a = annihilation(cfg).matrix, ad = creation(cfg).matrix;
  const auto g2 = QuantumState::basis(cfg, 0, 2).amplitudes;
  const Vector lowered = a * g2;
  CHECK(std::abs(lowered(cfg.index(0, 1)) - std::sqrt(2.0)) < 1e-15);
  CHECK((ad - a.adjoint()).norm() < 1e-15);
  const Matrix comm = a * ad - ad * a;
  for (int atom = 0; atom < 2; ++atom)
    for (int n = 0; n < cfg.n_max; ++n) CHECK(std::abs(comm(cfg.index(atom, n), cfg.index(atom, n)) - 1.0) < 1e-15);
  const Matrix sp = atomic_raising(cfg).matrix, sm = atomic_lowering(cfg).matrix;
  CHECK((sp * sm - excited_projector(cfg).matrix).norm() < 1e-15);
  CHECK((ad * a - photon_number(cfg).matrix).norm() < 1e-14);
}

TEST_CASE("hamiltonian is hermitian with or without drive") {
  const HilbertConfig cfg{2};
  SystemParams p = SystemParams::from_mhz(5.0, 2.7, 3.0, 13.0);
  PulseSpec pulse;
  pulse.peak_amplitude = 500.0;
  pulse.carrier_detuning = units::mhz_to_angular(-7.0);
  pulse.cw_background = 3.0;
  for (double t : {0.0, 0.004, 0.006, 0.05}) {
    const Matrix h = build_hamiltonian(p, cfg, &pulse, t).matrix;
    CHECK((h - h.adjoint()).norm() < 1e-12);
  }
  pulse.port = DrivePort::cavity;
  const Matrix h = build_hamiltonian(p, cfg, &pulse, 0.006).matrix;
  CHECK((h - h.adjoint()).norm() < 1e-12);
  CHECK((drive_operator(DrivePort::cavity, cfg) - drive_operator(DrivePort::cavity, cfg).adjoint()).norm() < 1e-15);
}

TEST_CASE("single-excitation eigenvalue gap is sqrt(4g^2 + delta^2)") {
  for (double d : {0.0, 5.0, 17.3, -40.0}) {
    CAPTURE(d);
    const SystemParams p = SystemParams::from_mhz(5.0, 2.7, 3.0, d);
    const auto ev = single_excitation_eigenvalues(p);
    CHECK(std::abs((ev[1] - ev[0]) - std::sqrt(4 * p.g * p.g + p.delta_ac * p.delta_ac)) < 1e-12 * (1 + ev[1] - ev[0]));
    const HilbertConfig cfg{2};
    const Matrix h = static_hamiltonian(p, cfg);
    Eigen::Matrix2cd block;
    const int e0 = cfg.index(1, 0), g1 = cfg.index(0, 1);
    block << h(e0, e0), h(e0, g1), h(g1, e0), h(g1, g1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    CHECK(std::abs(es.eigenvalues()(0) - ev[0]) < 1e-12 * (1 + std::abs(ev[0])));
    CHECK(std::abs(es.eigenvalues()(1) - ev[1]) < 1e-12 * (1 + std::abs(ev[1])));
  }
}

TEST_CASE("collapse channels split the cavity decay by eta_out") {
  const SystemParams p = SystemParams::canonical();
  const auto c = collapse_operators(p, HilbertConfig{});
  REQUIRE(c.size() == 3);
  CHECK(c[0].channel == Channel::cavity_detected);
  CHECK(c[0].rate == doctest::Approx(2 * p.kappa * 0.9));
  CHECK(c[1].rate == doctest::Approx(2 * p.kappa * 0.1));
  CHECK(c[2].rate == doctest::Approx(2 * p.gamma));
}

TEST_CASE("canonical parameters and unit conversion") {
  const SystemParams p = SystemParams::canonical();
  CHECK(units::angular_to_mhz(p.g) == doctest::Approx(5.0));
  CHECK(units::angular_to_mhz(p.kappa) == doctest::Approx(2.7));
  CHECK(units::angular_to_mhz(p.gamma) == doctest::Approx(3.0));
  for (double x : {0.0, 1.0, 2.7, 17.3, -123.456})
    CHECK(std::abs(units::angular_to_mhz(units::mhz_to_angular(x)) - x) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(x));
  CHECK(units::ns_to_us(units::us_to_ns(0.2)) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("invalid parameters are rejected") {
  SystemParams p = SystemParams::canonical();
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = SystemParams::canonical();
  p.g = std::nan("");
  CHECK_THROWS_AS(p.validate(), InputError);
  p = SystemParams::canonical();
  p.eta_out = 1.5;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = SystemParams::canonical();
  p.kappa = p.gamma = 0.0;
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(HilbertConfig{0}.validate(), InputError);
}

TEST_CASE("density matrix from a pure state") {
  const HilbertConfig cfg{2};
  const auto psi = QuantumState::basis(cfg, 1, 0);
  const auto rho = DensityMatrix::from_state(psi);
  CHECK(rho.trace() == doctest::Approx(1.0));
  CHECK(rho.expectation(excited_projector(cfg).matrix) == doctest::Approx(1.0));
  CHECK_NOTHROW(rho.validate());
  DensityMatrix bad = rho;
  bad.rho(0, 1) = 0.3;
  CHECK_THROWS(bad.validate());
}

}
