#include <doctest.h>

#include <cmath>
#include <random>

#include "bergman/error.hpp"
#include "bergman/potential.hpp"
#include "generators.hpp"

using namespace bergman;
using namespace bergman::potential;

namespace {

Weight random_weight(std::mt19937_64& rng, const GridP1& grid, int degree, int l_max = 6) {
  const auto modes = testgen::random_weight_modes(rng, degree, l_max, !grid.invariant());
  return Weight::from_modes(degree, grid, modes, testgen::uniform(rng, -1.0, 1.0));
}

}  // namespace

TEST_CASE("the reference weight has constant density d") {
  for (int d : {1, 2, 5}) {
    const Weight w = Weight::round(d, GridP1(16));
    CHECK(w.ma().min() == d);
    CHECK(w.ma().max() == d);
  }
}

TEST_CASE("Monge-Ampere volume equals the degree") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const GridP1 grid(32, trial % 2 == 0 ? 0 : 64);
    const Weight w = random_weight(rng, grid, d);
    CHECK(geometry::integrate(ma_density(w)) == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("Monge-Ampere density is linear in psi") {
  const GridP1 grid(32);
  const Weight w(1, GridField::from_function(grid, [](double u, double) { return 0.1 * u; }));
  const double lambda1 = geometry::laplacian_ref(
      GridField::from_function(grid, [](double u, double) { return u; }))[0] / grid.u(0);
  for (int i = 0; i < grid.n_u(); ++i) {
    CHECK(std::abs(w.ma()[i] - (1.0 + 0.1 * lambda1 * grid.u(i))) < 1e-13);
  }
}

TEST_CASE("non-positive curvature is rejected") {
  const GridP1 grid(32);
  const std::vector<Mode> modes{{2, 0, 0.2}};
  try {
    Weight::from_modes(1, grid, modes);
    FAIL("expected NotKahler");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotKahler);
  }
}

TEST_CASE("measure scaling laws under gauge shifts") {
  std::mt19937_64 rng(2);
  const GridP1 grid(24);
  const Weight w = random_weight(rng, grid, 2);
  const GridField base = GridField::from_function(grid, [](double u, double) { return 1.0 + 0.3 * u; });
  const double c = 0.37;
  const Weight wc = w.shifted(c);

  const auto s0 = MeasureSetting::s0(base, 2);
  CHECK(geometry::integrate(s0.base()) == doctest::Approx(2.0).epsilon(1e-14));
  const GridField a = mu_of(w, s0);
  const GridField b = mu_of(wc, s0);
  for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] == b[n]);

  for (const auto& s : {MeasureSetting::splus(base), MeasureSetting::sminus(base)}) {
    const GridField m0 = mu_of(w, s);
    const GridField m1 = mu_of(wc, s);
    for (std::size_t n = 0; n < m0.size(); ++n) {
      CHECK(m1[n] == doctest::Approx(std::exp(s.sign() * c) * m0[n]).epsilon(1e-15));
    }
    // The gauge never enters the sampled shape.
    const GridField shape0 = mu_shape(w, s);
    const GridField shape1 = mu_shape(wc, s);
    for (std::size_t n = 0; n < m0.size(); ++n) CHECK(shape0[n] == shape1[n]);
  }
}

TEST_CASE("calibrated S- makes the reference weight stationary") {
  for (int d : {1, 3}) {
    const GridP1 grid(16);
    const Weight w = Weight::round(d, grid);
    const auto s = MeasureSetting::sminus_calibrated(grid, d);
    const GridField mu = mu_of(w, s);
    for (std::size_t n = 0; n < mu.size(); ++n) CHECK(mu[n] == w.ma()[n]);
    CHECK(log_ma_over_mu(w, s).max_abs() == 0.0);
  }
}

TEST_CASE("scalar curvature of the round metric and its mean") {
  const GridP1 grid(32);
  const GridField s = scalar_curvature(Weight::round(1, grid));
  CHECK(s.min() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.max() == doctest::Approx(2.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const GridP1 g(48, trial % 4 == 3 ? 96 : 0);
    const Weight w = random_weight(rng, g, d);
    const double mean = geometry::integrate(scalar_curvature(w), w.ma()) / d;
    CHECK(mean == doctest::Approx(mean_scalar_curvature(d)).epsilon(1e-8));
  }
}

TEST_CASE("scalar curvature respects the antipodal symmetry") {
  const GridP1 grid(40);
  const std::vector<Mode> modes{{2, 0, 0.03}, {4, 0, -0.01}};
  const GridField s = scalar_curvature(Weight::from_modes(1, grid, modes));
  for (int i = 0; i < grid.n_u(); ++i) CHECK(std::abs(s[i] - s[grid.n_u() - 1 - i]) < 1e-12);
}

TEST_CASE("laplacian_phi basics and self-adjointness against MA") {
  const GridP1 grid(32);
  std::mt19937_64 rng(4);
  const GridField f = testgen::random_band_limited(grid, rng, 8);
  const Weight round2 = Weight::round(2, grid);
  CHECK((laplacian_phi(round2, f) - geometry::laplacian_ref(f) * 0.5).max_abs() < 1e-15);
  CHECK(laplacian_phi(round2, GridField(grid, 4.0)).max_abs() < 1e-13);

  for (int n_long : {0, 64}) {
    const GridP1 g(32, n_long);
    for (int trial = 0; trial < 20; ++trial) {
      const Weight w = random_weight(rng, g, 1 + trial % 2);
      const GridField a = testgen::random_band_limited(g, rng, 8);
      const GridField b = testgen::random_band_limited(g, rng, 8);
      const double lhs = geometry::integrate(laplacian_phi(w, a) * b, w.ma());
      const double rhs = geometry::integrate(a * laplacian_phi(w, b), w.ma());
      CHECK(std::abs(lhs - rhs) < 1e-10);
      CHECK(std::abs(geometry::integrate(laplacian_phi(w, a), w.ma())) < 1e-10);
    }
  }
}

TEST_CASE("sup distance") {
  std::mt19937_64 rng(5);
  const GridP1 grid(24);
  const Weight a = random_weight(rng, grid, 1);
  const Weight b = random_weight(rng, grid, 1);
  CHECK(sup_distance(a, a) == 0.0);
  CHECK(sup_distance(a, a.shifted(0.25)) == doctest::Approx(0.25).epsilon(1e-15));
  double oracle = 0.0;
  for (int i = 0; i < grid.n_u(); ++i) {
    oracle = std::max(oracle, std::abs((a.psi()[i] + a.gauge()) - (b.psi()[i] + b.gauge())));
  }
  CHECK(sup_distance(a, b) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(sup_distance(a, b) == sup_distance(b, a));
  const Weight c = random_weight(rng, grid, 1);
  CHECK(sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-15);
  try {
    sup_distance(a, Weight::round(2, grid));
    FAIL("expected DegreeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegreeMismatch);
  }
}

TEST_CASE("linearisation of MA / mu matches finite differences") {
  std::mt19937_64 rng(6);
  const GridP1 grid(32);
  const GridField base = GridField::from_function(grid, [](double u, double) { return 1.0 + 0.2 * u * u; });
  for (const auto& s : {MeasureSetting::s0(base, 1), MeasureSetting::splus(base), MeasureSetting::sminus(base)}) {
    const Weight w = random_weight(rng, grid, 1);
    const GridField f = testgen::random_band_limited(grid, rng, 5);
    auto ratio = [&](double step) {
      const Weight ws(1, w.psi() + f * step, w.gauge());
      return ma_density(ws) / mu_of(ws, s);
    };
    const double h = 1e-4;
    const GridField fd = (ratio(h) - ratio(-h)) * (0.5 / h);
    const GridField exact = (laplacian_phi(w, f) - f * static_cast<double>(s.sign())) * ratio(0.0);
    CHECK((fd - exact).max_abs() / exact.max_abs() < 1e-6);
  }
}
