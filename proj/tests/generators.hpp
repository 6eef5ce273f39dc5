#pragma once

// Seeded generators for property tests.

#include <random>
#include <vector>

#include "bergman/geometry.hpp"

namespace testgen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random modes up to degree l_max with coefficients decaying like 1/(1+l)^2.
/// Longitude modes are included only when `with_longitude` is set.
inline std::vector<bergman::geometry::Mode> random_modes(std::mt19937_64& rng, int l_max,
                                                         bool with_longitude) {
  std::vector<bergman::geometry::Mode> modes;
  for (int l = 0; l <= l_max; ++l) {
    const double scale = 1.0 / ((1.0 + l) * (1.0 + l));
    modes.push_back({l, 0, uniform(rng, -1.0, 1.0) * scale});
    if (!with_longitude) continue;
    for (int m = 1; m <= l; ++m) {
      modes.push_back({l, m, uniform(rng, -1.0, 1.0) * scale});
      modes.push_back({l, -m, uniform(rng, -1.0, 1.0) * scale});
    }
  }
  return modes;
}

inline bergman::geometry::GridField random_band_limited(const bergman::geometry::GridP1& grid,
                                                        std::mt19937_64& rng, int l_max) {
  const auto modes = random_modes(rng, l_max, !grid.invariant());
  return bergman::geometry::GridField::from_modes(grid, modes);
}

}  // namespace testgen

namespace testgen {

/// Modes of a random relative potential whose Laplacian is bounded by
/// budget * d, so that the Monge-Ampere density stays in [(1 - budget) d,
/// (1 + budget) d].
inline std::vector<bergman::geometry::Mode> random_weight_modes(std::mt19937_64& rng, int degree,
                                                                int l_max, bool with_longitude,
                                                                double budget = 0.5) {
  auto modes = random_modes(rng, l_max, with_longitude);
  double total = 0.0;
  for (auto& mode : modes) {
    if (mode.l == 0) continue;
    total += mode.l * (mode.l + 1.0) * std::abs(mode.coefficient);
  }
  // Schmidt functions are bounded by 1, so the Laplacian is bounded by total.
  const double scale = total > 0.0 ? budget * degree / total * uniform(rng, 0.2, 1.0) : 0.0;
  for (auto& mode : modes) {
    if (mode.l > 0) mode.coefficient *= scale;
  }
  return modes;
}

}  // namespace testgen

#include <Eigen/Dense>

namespace testgen {

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, int n) {
  Eigen::MatrixXcd m(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) m(a, b) = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
  }
  return m;
}

inline Eigen::MatrixXcd random_unitary(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_complex(rng, n));
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

/// Random positive-definite Hermitian matrix with eigenvalues in
/// [exp(-spread), exp(spread)].
inline Eigen::MatrixXcd random_spd(std::mt19937_64& rng, int n, double spread) {
  const Eigen::MatrixXcd u = random_unitary(rng, n);
  Eigen::VectorXd ev(n);
  for (int a = 0; a < n; ++a) ev[a] = std::exp(uniform(rng, -spread, spread));
  Eigen::MatrixXcd m = u * ev.asDiagonal() * u.adjoint();
  return 0.5 * (m + m.adjoint());
}

}  // namespace testgen
