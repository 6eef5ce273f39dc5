#pragma once

// Finite-dimensional side of the iteration: sections of O(kd) in the monomial
// basis, Hermitian forms on them, the Hilbert and Fubini-Study maps and the
// quantities built from them.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/potential.hpp"

namespace bergman::core {

using geometry::GridField;
using geometry::GridP1;
using potential::MeasureSetting;
using potential::Weight;

/// The monomials 1, z, ..., z^{kd} as sections of O(kd). Magnitudes are only
/// ever formed in log space:
///   log(|z^j|^2 / (1 + |z|^2)^{kd}) = j log sin^2(theta/2) + (kd - j) log cos^2(theta/2).
class SectionBasis {
 public:
  SectionBasis(int k, int degree);

  int k() const { return k_; }
  int degree() const { return degree_; }
  int dim() const { return k_ * degree_ + 1; }

  double log_section(int j, const GridP1& grid, int i) const {
    return j * grid.log_sin2_half(i) + (k_ * degree_ - j) * grid.log_cos2_half(i);
  }
  /// log binom(kd, j).
  double log_binomial(int j) const;

 private:
  int k_;
  int degree_;
};

/// Positive-definite Hermitian form on H^0(O(kd)) in the monomial basis,
///   H = exp(log_scale - k * shift) * matrix.
/// `shift` carries the additive constant of the weight it came from, so that
/// gauge shifts are tracked exactly; `log_scale` keeps `matrix` well scaled.
struct HermitianForm {
  int k = 1;
  int degree = 1;
  Eigen::MatrixXcd matrix;
  double shift = 0.0;
  double log_scale = 0.0;
  bool diagonal = false;

  int dim() const { return static_cast<int>(matrix.rows()); }

  /// Wraps an explicit matrix. Throws DimensionMismatch if the size is not
  /// kd + 1 and InvalidArgument if it is not Hermitian.
  static HermitianForm from_matrix(int k, int degree, const Eigen::MatrixXcd& m);

  /// The form as a plain matrix (may underflow for large k).
  Eigen::MatrixXcd dense() const;

  /// exp(k a) * H, whose Fubini-Study weight is fs(H) - a.
  HermitianForm scaled(double a) const;

  /// Text format: a header line then one row per line, each entry as a
  /// "re im" pair of hex floats. Round trips bit for bit.
  std::string serialize() const;
  static HermitianForm parse(const std::string& text);
};

/// L^2 form of the monomials against exp(-k phi) mu(phi). Diagonal when the
/// grid is invariant.
HermitianForm hilb(const Weight& phi, const MeasureSetting& s, int k);

/// Fubini-Study weight (1/k) log((V / N) sum |s_i|^2) of an orthonormal basis
/// of H, with V = d. The result is sampled on `grid`.
Weight fs(const HermitianForm& h, const GridP1& grid);

/// fs evaluated through an explicitly supplied orthonormal basis (columns of
/// `basis` hold monomial coefficients of the basis sections of `h`).
Weight fs_with_basis(const HermitianForm& h, const Eigen::MatrixXcd& basis, const GridP1& grid);

/// A basis of sections orthonormal for h (Cholesky based).
Eigen::MatrixXcd orthonormal_basis(const HermitianForm& h);

/// Bergman function sum |s_i|^2 exp(-k phi) for an orthonormal basis of
/// hilb(phi, s, k). Computed through an eigendecomposition, independently of
/// the Cholesky route used by fs.
GridField bergman_rho(const Weight& phi, const MeasureSetting& s, int k);

/// The increment F(phi) = (1/k) log(V rho / N). The sampled part `field` does
/// not depend on the gauge of phi; the constant part is `gauge`, equal to 0
/// in S0 and to -+gauge(phi)/k in S+-.
struct Increment {
  GridField field;
  double gauge = 0.0;
  GridField total() const { return field + gauge; }
};
Increment f_functional(const Weight& phi, const MeasureSetting& s, int k);

/// One step T(phi) = fs(hilb(phi)).
Weight iterate_once(const Weight& phi, const MeasureSetting& s, int k);

/// [phi_0, T phi_0, ..., T^m phi_0]. Errors carry the failing step index.
std::vector<Weight> iterate(const Weight& phi0, const MeasureSetting& s, int k, int m);

/// Like iterate, also returning the Hilbert forms hilb(phi_j) for j < m and
/// the form of the last iterate.
struct IterationRun {
  std::vector<Weight> weights;
  std::vector<HermitianForm> forms;
};
IterationRun iterate_with_forms(const Weight& phi0, const MeasureSetting& s, int k, int m);

/// sqrt(sum lambda_j^2) with lambda_j = -log(nu_j) / 2 and nu_j the
/// generalized eigenvalues of (H1, H0).
double dk_distance(const HermitianForm& h0, const HermitianForm& h1);

/// k int mu(H) MA(fs(H)) where mu(H) is the pointwise moment map
/// (s_a, s_b) / sum |s_i|^2 in the Cholesky orthonormal basis.
Eigen::MatrixXcd center_of_mass(const HermitianForm& h, const GridP1& grid);

/// Largest absolute eigenvalue of a Hermitian matrix.
double operator_norm(const Eigen::MatrixXcd& m);

struct BalancedOptions {
  double tol = 1e-10;
  int max_iter = 500;
};

struct BalancedResult {
  Weight weight;
  std::vector<double> residuals;  // sup_distance(T phi_j, phi_j)
  bool converged = false;
  std::string warning;
};

/// NoConvergence raised by `balanced`, carrying the residual history.
class BalancedNoConvergence : public Error {
 public:
  BalancedNoConvergence(const std::string& what, std::vector<double> residuals)
      : Error(ErrorCode::NoConvergence, what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Fixed point of T. For S0 and S+ failure to reach the tolerance raises
/// NoConvergence; for S- (where a fixed point need not exist) the search is
/// best effort, never throws on the cap and sets `warning`.
BalancedResult balanced(const MeasureSetting& s, int k, const Weight& start,
                        const BalancedOptions& options = {});

}  // namespace bergman::core
