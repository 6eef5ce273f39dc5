#pragma once

// Discretisation of the Riemann sphere.
//
// Points are addressed by u = cos(theta) in [-1, 1] (theta is the polar angle
// measured from z = 0) and a longitude a in [0, 2 pi). In the affine chart
// |z|^2 = (1 - u) / (1 + u). Integrals are taken against the Fubini-Study
// form omega_FS, normalised to total mass 1, which in these coordinates is
// du da / (4 pi).

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace bergman::geometry {

struct QuadratureNode {
  double u = 0.0;
  double weight = 0.0;  // Gauss-Legendre weight; the weights sum to 2
};

/// Real spherical-harmonic mode. For m == 0 the angular factor is the
/// Legendre polynomial P_l(u); for m > 0 it is the Schmidt semi-normalised
/// associated function P_l^m(u) cos(m a), and for m < 0 the same with
/// sin(|m| a). Every mode is an eigenfunction of laplacian_ref with
/// eigenvalue -l (l + 1).
struct Mode {
  int l = 0;
  int m = 0;
  double coefficient = 0.0;
};

/// Gauss-Legendre nodes in u, optionally tensored with an equispaced ring in
/// longitude. n_long == 0 selects the invariant (longitude independent) mode.
/// Instances share immutable tables and are cheap to copy.
class GridP1 {
 public:
  explicit GridP1(int n_u, int n_long = 0, double resolution_tolerance = 1e-8);

  /// Default resolution for sections of O(k d): n_u = max(256, 8 k d). The
  /// general mode uses n_long = 2 n_u.
  static GridP1 for_level(int k, int degree, bool invariant = true, double resolution_tolerance = 1e-8);

  int n_u() const;
  int n_long() const;
  bool invariant() const { return n_long() == 0; }
  int columns() const { return invariant() ? 1 : n_long(); }
  std::size_t size() const;

  const std::vector<QuadratureNode>& nodes() const;
  double u(int i) const;
  double theta(int i) const;
  double sin_theta(int i) const;
  double longitude(int j) const;

  /// log sin^2(theta/2) = log((1-u)/2) and log cos^2(theta/2) = log((1+u)/2),
  /// evaluated from theta so that the poles do not lose digits.
  double log_sin2_half(int i) const;
  double log_cos2_half(int i) const;

  /// P_l(u_i) for 0 <= l < n_u.
  double legendre(int l, int i) const;

  double resolution_tolerance() const;

  GridP1 doubled() const;

  bool operator==(const GridP1& other) const;
  bool operator!=(const GridP1& other) const { return !(*this == other); }

 private:
  struct Tables;
  std::shared_ptr<const Tables> tables_;
};

/// Real samples at the nodes of a grid, stored u-major: index i * columns + j.
class GridField {
 public:
  GridField() = default;
  explicit GridField(GridP1 grid, double value = 0.0);
  GridField(GridP1 grid, std::vector<double> values);

  static GridField from_function(GridP1 grid,
                                 const std::function<double(double u, double longitude)>& f);
  static GridField from_modes(GridP1 grid, std::span<const Mode> modes);

  const GridP1& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator[](std::size_t n) const { return values_[n]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double at(int i, int j = 0) const;

  template <typename F>
  GridField map(F&& f) const {
    GridField out(grid_, values_);
    for (double& v : out.values_) v = f(v);
    return out;
  }

  GridField& operator+=(const GridField& other);
  GridField& operator-=(const GridField& other);
  GridField& operator*=(const GridField& other);
  GridField& operator/=(const GridField& other);
  GridField& operator+=(double c);
  GridField& operator*=(double c);

  double max_abs() const;
  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  GridP1 grid_{1};
  std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(GridField a, const GridField& b);
GridField operator/(GridField a, const GridField& b);
GridField operator+(GridField a, double c);
GridField operator-(GridField a, double c);
GridField operator*(GridField a, double c);
GridField operator*(double c, GridField a);
GridField operator-(GridField a);

GridField exp(const GridField& f);
GridField log(const GridField& f);

/// Expansion in orthonormal associated Legendre functions Phat_l^m
/// (int_{-1}^{1} Phat^2 du = 1). The field is
///   f(u, a) = sum_{m >= 0} kappa_m Re[ sum_l c[m][l - m] e^{i m a} ] Phat_l^m(u)
/// with kappa_0 = 1 and kappa_m = 2 otherwise.
struct SpectralCoefficients {
  int l_max = 0;
  int m_max = 0;
  std::vector<std::vector<std::complex<double>>> by_m;
};

SpectralCoefficients analyze(const GridField& f);
GridField synthesize(const GridP1& grid, const SpectralCoefficients& c);

/// Recovers the mode list of a band-limited field (coefficients with
/// |c| <= drop_below are omitted).
std::vector<Mode> to_modes(const GridField& f, int l_max, double drop_below = 0.0);

/// Smallest degree beyond which the expansion of f is at rounding level.
int effective_degree(const GridField& f, double noise_scale = 0.0);

/// Quadrature value of int f omega_FS.
double integrate(const GridField& f);
/// Quadrature value of int f * density omega_FS.
double integrate(const GridField& f, const GridField& density);

/// g with (sqrt(-1)/2pi) ddbar f = g omega_FS, i.e. the Laplace-Beltrami
/// operator of the unit round sphere.
///
/// Expansion coefficients at the rounding level of the samples are dropped
/// before differentiating. The rounding level is taken relative to
/// max(sup |f|, noise_scale); pass the magnitude of the quantity f was
/// computed from when f is a small difference of large numbers.
GridField laplacian_ref(const GridField& f, double noise_scale = 0.0);

/// max_{a + b <= l} sup_nodes |d_theta^a d_long^b f| (meridian arc-length
/// derivatives of the unit round metric). l must be in [0, 4].
double cl_norm(const GridField& f, int l, double noise_scale = 0.0);

/// Values at the nodes of `target` of the spectral interpolant of f.
GridField resample(const GridField& f, const GridP1& target);

/// Orthonormal Phat_l^m(u) for l = m..l_max written to out[0 .. l_max - m].
void normalized_legendre(int m, int l_max, double u, double sin_theta, double* out);

}  // namespace bergman::geometry
