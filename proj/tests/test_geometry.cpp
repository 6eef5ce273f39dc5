#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/geometry.hpp"
#include "generators.hpp"

using namespace bergman;
using namespace bergman::geometry;

namespace {

// Second-order central differences of (1 - u^2) f'(u), the round Laplacian of
// a function of u alone.
double fd_radial_laplacian(const std::function<double(double)>& f, double u, double h) {
  auto flux = [&](double x) { return (1.0 - x * x) * (f(x + h) - f(x - h)) / (2.0 * h); };
  return (flux(u + h) - flux(u - h)) / (2.0 * h);
}

// Mode evaluated directly at (theta, a), independent of the grid tables.
double mode_value(const Mode& mode, double theta, double a) {
  const int m = std::abs(mode.m);
  std::vector<double> col(mode.l + 1);
  normalized_legendre(m, mode.l, std::cos(theta), std::sin(theta), col.data());
  double radial = std::sqrt(2.0 / (2.0 * mode.l + 1.0)) * col[mode.l - m];
  if (m != 0) radial *= std::numbers::sqrt2;
  if (mode.m > 0) radial *= std::cos(m * a);
  if (mode.m < 0) radial *= std::sin(m * a);
  return mode.coefficient * radial;
}

}  // namespace

TEST_CASE("quadrature integrates polynomials in u up to degree 2n-1") {
  const GridP1 grid(16);
  for (int p = 0; p <= 31; ++p) {
    const GridField f = GridField::from_function(grid, [p](double u, double) { return std::pow(u, p); });
    const double exact = (p % 2 == 0) ? 1.0 / (p + 1.0) : 0.0;
    CHECK(std::abs(integrate(f) - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("total mass and a closed-form radial integral") {
  for (int n_long : {0, 64}) {
    const GridP1 grid(32, n_long);
    CHECK(integrate(GridField(grid, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    const GridField u = GridField::from_function(grid, [](double x, double) { return x; });
    CHECK(std::abs(integrate(u)) < 1e-15);
    // 1 / (1 + |z|^2) = (1 + u) / 2
    const GridField g = GridField::from_function(grid, [](double x, double) {
      const double z2 = (1.0 - x) / (1.0 + x);
      return 1.0 / (1.0 + z2);
    });
    CHECK(integrate(g) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("grid doubling leaves smooth integrals unchanged") {
  const GridP1 coarse(64);
  const GridP1 fine = coarse.doubled();
  auto f = [](double u, double) { return std::exp(0.7 * u) / (1.3 + u); };
  const double a = integrate(GridField::from_function(coarse, f));
  const double b = integrate(GridField::from_function(fine, f));
  CHECK(std::abs(a - b) < 1e-13);
}

TEST_CASE("laplacian of u matches a finite-difference oracle") {
  const GridP1 grid(64);
  const GridField u = GridField::from_function(grid, [](double x, double) { return x; });
  const GridField lap = laplacian_ref(u);
  // The oracle fixes the first eigenvalue from a single interior point.
  const double x0 = 0.3;
  const double lambda1 = fd_radial_laplacian([](double x) { return x; }, x0, 1e-4) / x0;
  CHECK(lambda1 == doctest::Approx(-2.0).epsilon(1e-6));
  for (int i = 0; i < grid.n_u(); ++i) CHECK(std::abs(lap[i] - lambda1 * grid.u(i)) < 1e-6);
  for (int i = 0; i < grid.n_u(); ++i) CHECK(std::abs(lap[i] + 2.0 * grid.u(i)) < 1e-13);
}

TEST_CASE("laplacian of a smooth radial function matches finite differences") {
  const GridP1 grid(64);
  auto f = [](double x) { return std::exp(0.5 * x) + 0.1 * x * x * x; };
  const GridField lap = laplacian_ref(GridField::from_function(grid, [&](double x, double) { return f(x); }));
  for (int i = 0; i < grid.n_u(); i += 7) {
    CHECK(lap[i] == doctest::Approx(fd_radial_laplacian(f, grid.u(i), 1e-4)).epsilon(1e-6));
  }
}

TEST_CASE("laplacian of constants vanishes and integrates to zero") {
  for (int n_long : {0, 48}) {
    const GridP1 grid(24, n_long);
    CHECK(laplacian_ref(GridField(grid, 3.5)).max_abs() < 1e-13);
    std::mt19937_64 rng(7);
    const GridField f = testgen::random_band_limited(grid, rng, 10);
    CHECK(std::abs(integrate(laplacian_ref(f))) < 1e-12);
  }
}

TEST_CASE("modes are eigenfunctions and round trip through the grid") {
  const GridP1 grid(32, 64);
  const std::vector<Mode> modes{{0, 0, 0.4}, {3, 0, -0.2}, {2, 1, 0.3}, {5, -3, 0.15}, {7, 7, 0.05}};
  for (const Mode& mode : modes) {
    const std::vector<Mode> single{mode};
    const GridField f = GridField::from_modes(grid, single);
    const GridField lap = laplacian_ref(f);
    const GridField expected = f * (-static_cast<double>(mode.l) * (mode.l + 1));
    CHECK((lap - expected).max_abs() < 1e-11);
  }
  const GridField f = GridField::from_modes(grid, modes);
  const std::vector<Mode> back = to_modes(f, 31, 1e-14);
  REQUIRE(back.size() == modes.size());
  for (const Mode& want : modes) {
    bool found = false;
    for (const Mode& got : back) {
      if (got.l == want.l && got.m == want.m) {
        found = true;
        CHECK(std::abs(got.coefficient - want.coefficient) < 1e-12);
      }
    }
    CHECK(found);
  }
  CHECK(effective_degree(f) == 7);
}

TEST_CASE("invariant grids reject longitude modes") {
  const GridP1 grid(16);
  const std::vector<Mode> modes{{2, 1, 1.0}};
  CHECK_THROWS_AS(GridField::from_modes(grid, modes), Error);
}

TEST_CASE("laplacian is self-adjoint on random band-limited pairs") {
  std::mt19937_64 rng(2024);
  for (int n_long : {0, 64}) {
    const GridP1 grid(32, n_long);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const GridField f = testgen::random_band_limited(grid, rng, 12);
      const GridField h = testgen::random_band_limited(grid, rng, 12);
      const double lhs = integrate(laplacian_ref(f) * h);
      const double rhs = integrate(f * laplacian_ref(h));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("cl_norm of u matches a refined finite-difference oracle") {
  const GridP1 grid(48);
  const GridField u = GridField::from_function(grid, [](double x, double) { return x; });
  double oracle = u.max_abs();
  const double h = 1e-5;
  for (int i = 0; i < grid.n_u(); ++i) {
    const double th = grid.theta(i);
    oracle = std::max(oracle, std::abs((std::cos(th + h) - std::cos(th - h)) / (2.0 * h)));
  }
  CHECK(std::abs(cl_norm(u, 1) - oracle) < 1e-8);
  CHECK(cl_norm(u, 0) == u.max_abs());
}

TEST_CASE("cl_norm derivatives agree with finite differences in theta and longitude") {
  const GridP1 grid(20, 40);
  const std::vector<Mode> modes{{1, 0, 0.3}, {2, 1, -0.4}, {3, -2, 0.25}, {4, 3, 0.1}};
  auto value = [&](double th, double a) {
    double s = 0.0;
    for (const Mode& mode : modes) s += mode_value(mode, th, a);
    return s;
  };
  const GridField f = GridField::from_modes(grid, modes);
  // Sup of mixed derivatives by nested central differences.
  const double h = 1e-3;
  auto d_theta = [&](auto&& g) {
    return [=](double th, double a) { return (g(th + h, a) - g(th - h, a)) / (2.0 * h); };
  };
  auto d_long = [&](auto&& g) {
    return [=](double th, double a) { return (g(th, a + h) - g(th, a - h)) / (2.0 * h); };
  };
  auto sup = [&](auto&& g) {
    double best = 0.0;
    for (int i = 0; i < grid.n_u(); ++i) {
      for (int j = 0; j < grid.n_long(); ++j) best = std::max(best, std::abs(g(grid.theta(i), grid.longitude(j))));
    }
    return best;
  };
  const double c0 = sup(value);
  const double c1 = std::max({c0, sup(d_theta(value)), sup(d_long(value))});
  const double c2 = std::max({c1, sup(d_theta(d_theta(value))), sup(d_theta(d_long(value))),
                              sup(d_long(d_long(value)))});
  CHECK(cl_norm(f, 0) == doctest::Approx(c0).epsilon(1e-12));
  CHECK(cl_norm(f, 1) == doctest::Approx(c1).epsilon(1e-5));
  CHECK(cl_norm(f, 2) == doctest::Approx(c2).epsilon(1e-5));
  CHECK(cl_norm(f, 2) <= cl_norm(f, 3));
  CHECK(cl_norm(f, 3) <= cl_norm(f, 4));
}

TEST_CASE("cl_norm of a constant and unsupported orders") {
  const GridP1 grid(16, 32);
  const GridField c(grid, -2.25);
  for (int l = 0; l <= 4; ++l) CHECK(cl_norm(c, l) == doctest::Approx(2.25).epsilon(1e-14));
  CHECK_THROWS_AS(cl_norm(c, 5), Error);
  try {
    cl_norm(c, 5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedOrder);
  }
}

TEST_CASE("non-finite samples are rejected") {
  GridField f(GridP1(8), 1.0);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  try {
    integrate(f);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteField);
  }
}

TEST_CASE("under-resolved fields are reported") {
  const GridP1 grid(24);
  const GridField f = GridField::from_function(grid, [](double u, double) { return std::exp(30.0 * u); });
  try {
    laplacian_ref(f);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ResolutionTooLow);
  }
}

TEST_CASE("resampling is spectrally exact for band-limited fields") {
  std::mt19937_64 rng(11);
  const GridP1 a(24);
  const GridP1 b(40);
  const GridField f = testgen::random_band_limited(a, rng, 15);
  const GridField back = resample(resample(f, b), a);
  CHECK((back - f).max_abs() < 1e-13);

  const GridP1 a2(16, 32);
  const GridP1 b2(24, 48);
  const GridField g = testgen::random_band_limited(a2, rng, 10);
  CHECK((resample(resample(g, b2), a2) - g).max_abs() < 1e-13);
  // An invariant field lifted to a longitude grid is constant along rings.
  const GridField lifted = resample(f, b2);
  for (int i = 0; i < b2.n_u(); ++i) CHECK(lifted.at(i, 5) == lifted.at(i, 0));
}

TEST_CASE("operations are deterministic") {
  std::mt19937_64 rng(5);
  const GridP1 grid(32, 64);
  const GridField f = testgen::random_band_limited(grid, rng, 12);
  const GridField a = laplacian_ref(f);
  const GridField b = laplacian_ref(f);
  for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] == b[n]);
  CHECK(cl_norm(f, 2) == cl_norm(f, 2));
}
