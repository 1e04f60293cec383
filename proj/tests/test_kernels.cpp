#include <doctest.h>

#include <random>
#include <vector>

#include "cqed/kernels.hpp"

using namespace cqed::kernels;

namespace {

std::vector<cplx> random_cplx(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {d(rng), d(rng)};
  return v;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar table is always available") {
  CHECK(scalar_table().isa == Isa::scalar);
  CHECK(select(Isa::scalar));
  CHECK(active().isa == Isa::scalar);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_table();
  if (!v) {
    MESSAGE("AVX2 kernels unavailable on this machine; skipped");
    return;
  }
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 12u, 17u}) {
    CAPTURE(n);
    const auto a = random_cplx(n * n, rng), b = random_cplx(n * n, rng), x = random_cplx(n, rng);
    std::vector<cplx> c1(n * n), c2(n * n), y1(n), y2(n);
    s.gemm(n, a.data(), b.data(), c1.data());
    v->gemm(n, a.data(), b.data(), c2.data());
    CHECK(max_abs_diff(c1, c2) < 1e-13 * static_cast<double>(n));
    s.gemv(n, a.data(), x.data(), y1.data());
    v->gemv(n, a.data(), x.data(), y2.data());
    CHECK(max_abs_diff(y1, y2) < 1e-13 * static_cast<double>(n));

    const auto* xd = reinterpret_cast<const double*>(x.data());
    std::vector<double> r1(2 * n, 0.5), r2(2 * n, 0.5);
    s.axpy(2 * n, 0.3, xd, r1.data());
    v->axpy(2 * n, 0.3, xd, r2.data());
    for (std::size_t i = 0; i < 2 * n; ++i) CHECK(r1[i] == doctest::Approx(r2[i]).epsilon(1e-15));

    const auto* bd = reinterpret_cast<const double*>(b.data());
    CHECK(s.scaled_max_error(2 * n, xd, bd, r1.data(), 1e-12, 1e-9) ==
          doctest::Approx(v->scaled_max_error(2 * n, xd, bd, r1.data(), 1e-12, 1e-9)).epsilon(1e-14));
    CHECK(s.norm_sq(n, x.data()) == doctest::Approx(v->norm_sq(n, x.data())).epsilon(1e-14));
  }
}

TEST_CASE("runtime selection round-trips") {
  const bool have = avx2_table() != nullptr;
  CHECK(select(Isa::avx2) == have);
  if (have) CHECK(active().isa == Isa::avx2);
  CHECK(select(Isa::scalar));
  CHECK(isa_name(Isa::scalar) == "scalar");
  if (have) select(Isa::avx2);
}

}
