#include "bergman/core.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

namespace bergman::core {

namespace {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

void require_level(int k, int degree) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (degree < 1) throw Error(ErrorCode::InvalidArgument, "degree must be positive");
}

void require_resolution(const GridP1& grid, int k, int degree) {
  const int needed = k * degree + 1;
  if (grid.n_u() < needed) {
    throw Error(ErrorCode::ResolutionTooLow,
                "grid with n_u = " + std::to_string(grid.n_u()) + " cannot resolve sections of O(" +
                    std::to_string(k * degree) + ")");
  }
  if (!grid.invariant() && grid.n_long() <= 2 * (needed - 1)) {
    throw Error(ErrorCode::ResolutionTooLow, "longitude ring too coarse for sections of O(" +
                                                 std::to_string(k * degree) + ")");
  }
}

// Quadrature factor of node (i, j): weight_i / 2 / columns.
double node_weight(const GridP1& grid, int i) {
  return 0.5 * grid.nodes()[i].weight / grid.columns();
}

// Diagonal of the matrix part, in log form, used for equilibration.
VectorXd log_diagonal(const HermitianForm& h) {
  VectorXd out(h.dim());
  for (int a = 0; a < h.dim(); ++a) {
    const double v = h.matrix(a, a).real();
    if (!(v > 0.0)) {
      throw Error(ErrorCode::GramNotPositive, "diagonal entry " + std::to_string(a) + " is not positive");
    }
    out[a] = std::log(v);
  }
  return out;
}

MatrixXcd equilibrated(const HermitianForm& h, const VectorXd& log_d) {
  MatrixXcd m = h.matrix;
  const int n = h.dim();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) m(a, b) *= std::exp(-0.5 * (log_d[a] + log_d[b]));
  }
  for (int a = 0; a < n; ++a) m(a, a) = 1.0;
  return m;
}

bool is_numerically_diagonal(const HermitianForm& h) {
  if (h.diagonal) return true;
  const int n = h.dim();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const double scale = std::sqrt(std::abs(h.matrix(a, a).real() * h.matrix(b, b).real()));
      if (std::abs(h.matrix(a, b)) > 1e-13 * scale) return false;
    }
  }
  return true;
}

// Inverse of the equilibrated matrix through a Cholesky factorisation.
MatrixXcd cholesky_inverse(const MatrixXcd& m) {
  Eigen::LLT<MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::GramNotPositive, "Cholesky factorisation failed");
  }
  return llt.solve(MatrixXcd::Identity(m.rows(), m.cols()));
}

// Inverse of the equilibrated matrix through its eigendecomposition.
MatrixXcd eigen_inverse(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorCode::GramNotPositive, "Gram matrix has a non-positive eigenvalue");
  }
  const VectorXd inv = es.eigenvalues().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

// log sum_{a,b} conj(e_a) K_ab e_b / (1 + |z|^2)^{kd} at every node, where
// e_a = z^a and K = D^{-1/2} kernel D^{-1/2}. `kernel` is empty on the
// diagonal path (kernel = identity).
GridField log_bergman_density(const SectionBasis& basis, const VectorXd& log_d,
                              const MatrixXcd& kernel, const GridP1& grid) {
  const int n = basis.dim();
  const int cols = grid.columns();
  GridField out(grid);
  std::vector<double> t(n);
  if (kernel.size() == 0) {
    for (int i = 0; i < grid.n_u(); ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < n; ++a) {
        t[a] = basis.log_section(a, grid, i) - log_d[a];
        top = std::max(top, t[a]);
      }
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += std::exp(t[a] - top);
      const double v = top + std::log(s);
      for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] = v;
    }
    return out;
  }
  if (grid.invariant()) {
    throw Error(ErrorCode::GridMismatch,
                "a form that is not diagonal needs a grid with a longitude ring");
  }
  std::vector<cplx> diag_sums(n);
  std::vector<double> r(n);
  for (int i = 0; i < grid.n_u(); ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      t[a] = 0.5 * (basis.log_section(a, grid, i) - log_d[a]);
      top = std::max(top, t[a]);
    }
    for (int a = 0; a < n; ++a) r[a] = std::exp(t[a] - top);
    // S_q = sum_{b - a = q} r_a r_b K_ab for q >= 0.
    for (int q = 0; q < n; ++q) {
      cplx s = 0.0;
      for (int a = 0; a + q < n; ++a) s += r[a] * r[a + q] * kernel(a, a + q);
      diag_sums[q] = s;
    }
    for (int j = 0; j < cols; ++j) {
      const double alpha = grid.longitude(j);
      double v = diag_sums[0].real();
      for (int q = 1; q < n; ++q) {
        const cplx e = std::polar(1.0, q * alpha);
        v += 2.0 * (diag_sums[q] * e).real();
      }
      if (!(v > 0.0)) throw Error(ErrorCode::GramNotPositive, "Bergman density is not positive");
      out[static_cast<std::size_t>(i) * cols + j] = 2.0 * top + std::log(v);
    }
  }
  return out;
}

// log of exp(-k psi) times the gauge-free measure, and its maximum.
GridField log_integrand(const Weight& phi, const MeasureSetting& s, int k, double& top) {
  const GridField shape = potential::mu_shape(phi, s);
  GridField out(phi.grid());
  top = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = -k * phi.psi()[n] + std::log(shape[n]);
    top = std::max(top, out[n]);
  }
  return out;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw Error(ErrorCode::InvalidArgument, "truncated Hermitian form text");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) {
    throw Error(ErrorCode::InvalidArgument, "bad number '" + token + "' in Hermitian form text");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

SectionBasis::SectionBasis(int k, int degree) : k_(k), degree_(degree) { require_level(k, degree); }

double SectionBasis::log_binomial(int j) const {
  const int n = k_ * degree_;
  return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
}

HermitianForm HermitianForm::from_matrix(int k, int degree, const Eigen::MatrixXcd& m) {
  require_level(k, degree);
  const int n = k * degree + 1;
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "matrix size does not match kd + 1 = " + std::to_string(n));
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw Error(ErrorCode::InvalidArgument, "matrix is not Hermitian");
  }
  HermitianForm h;
  h.k = k;
  h.degree = degree;
  h.matrix = 0.5 * (m + m.adjoint());
  h.diagonal = true;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b && h.matrix(a, b) != 0.0) h.diagonal = false;
    }
  }
  return h;
}

Eigen::MatrixXcd HermitianForm::dense() const {
  return std::exp(log_scale - k * shift) * matrix;
}

HermitianForm HermitianForm::scaled(double a) const {
  HermitianForm out = *this;
  out.shift -= a;
  return out;
}

std::string HermitianForm::serialize() const {
  std::ostringstream os;
  os << "hermitian_form " << k << ' ' << degree << ' ' << dim() << ' ' << (diagonal ? 1 : 0) << ' '
     << hex(shift) << ' ' << hex(log_scale) << '\n';
  for (int a = 0; a < dim(); ++a) {
    for (int b = 0; b < dim(); ++b) {
      if (b > 0) os << ' ';
      os << hex(matrix(a, b).real()) << ' ' << hex(matrix(a, b).imag());
    }
    os << '\n';
  }
  return os.str();
}

HermitianForm HermitianForm::parse(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  int k = 0;
  int degree = 0;
  int n = 0;
  int diag = 0;
  if (!(in >> tag >> k >> degree >> n >> diag) || tag != "hermitian_form") {
    throw Error(ErrorCode::InvalidArgument, "not a Hermitian form header");
  }
  require_level(k, degree);
  if (n != k * degree + 1) throw Error(ErrorCode::DimensionMismatch, "form size does not match kd + 1");
  HermitianForm h;
  h.k = k;
  h.degree = degree;
  h.diagonal = diag != 0;
  h.shift = parse_double(in);
  h.log_scale = parse_double(in);
  h.matrix.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double re = parse_double(in);
      const double im = parse_double(in);
      h.matrix(a, b) = cplx(re, im);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

HermitianForm hilb(const Weight& phi, const MeasureSetting& s, int k) {
  require_level(k, phi.degree());
  const GridP1& grid = phi.grid();
  require_resolution(grid, k, phi.degree());
  const SectionBasis basis(k, phi.degree());
  const int n = basis.dim();

  double top = 0.0;
  const GridField log_h = log_integrand(phi, s, k, top);

  HermitianForm h;
  h.k = k;
  h.degree = phi.degree();
  h.log_scale = top;
  h.shift = phi.gauge() - s.sign() * phi.gauge() / k;
  h.matrix = MatrixXcd::Zero(n, n);

  if (grid.invariant()) {
    h.diagonal = true;
    for (int a = 0; a < n; ++a) {
      double sum = 0.0;
      for (int i = 0; i < grid.n_u(); ++i) {
        sum += node_weight(grid, i) * std::exp(basis.log_section(a, grid, i) + log_h[i] - top);
      }
      if (!(sum > 0.0)) {
        throw Error(ErrorCode::GramNotPositive, "Gram diagonal entry " + std::to_string(a) + " underflowed");
      }
      h.matrix(a, a) = sum;
    }
    return h;
  }

  h.diagonal = false;
  const int cols = grid.columns();
  // Fourier moments hat_q(i) = mean_j h(i, j) e^{i q alpha_j} for 0 <= q < n.
  std::vector<cplx> moments(static_cast<std::size_t>(grid.n_u()) * n);
  for (int i = 0; i < grid.n_u(); ++i) {
    for (int q = 0; q < n; ++q) {
      cplx sum = 0.0;
      for (int j = 0; j < cols; ++j) {
        const double v = std::exp(log_h[static_cast<std::size_t>(i) * cols + j] - top);
        const long long idx = (static_cast<long long>(q) * j) % cols;
        sum += v * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(idx) / cols);
      }
      moments[static_cast<std::size_t>(i) * n + q] = sum / static_cast<double>(cols);
    }
  }
  std::vector<double> half(n);
  for (int i = 0; i < grid.n_u(); ++i) {
    const double w = 0.5 * grid.nodes()[i].weight;
    for (int a = 0; a < n; ++a) half[a] = 0.5 * basis.log_section(a, grid, i);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        // G_ab = int z^a conj(z)^b h: longitude moment of order a - b.
        const cplx m = std::conj(moments[static_cast<std::size_t>(i) * n + (b - a)]);
        h.matrix(a, b) += w * std::exp(half[a] + half[b]) * m;
      }
    }
  }
  for (int a = 0; a < n; ++a) {
    h.matrix(a, a) = h.matrix(a, a).real();
    for (int b = a + 1; b < n; ++b) h.matrix(b, a) = std::conj(h.matrix(a, b));
  }
  return h;
}

namespace {

Weight weight_from_log_density(const HermitianForm& h, const GridField& log_b) {
  const int n = h.dim();
  const double log_norm = std::log(static_cast<double>(h.degree) / n);
  GridField psi(log_b.grid());
  for (std::size_t p = 0; p < psi.size(); ++p) psi[p] = (log_norm + log_b[p] - h.log_scale) / h.k;
  return Weight(h.degree, std::move(psi), h.shift);
}

}  // namespace

Weight fs(const HermitianForm& h, const GridP1& grid) {
  require_resolution(grid, h.k, h.degree);
  const SectionBasis basis(h.k, h.degree);
  const VectorXd log_d = log_diagonal(h);
  if (is_numerically_diagonal(h)) {
    return weight_from_log_density(h, log_bergman_density(basis, log_d, MatrixXcd(), grid));
  }
  const MatrixXcd kernel = cholesky_inverse(equilibrated(h, log_d));
  return weight_from_log_density(h, log_bergman_density(basis, log_d, kernel, grid));
}

Eigen::MatrixXcd orthonormal_basis(const HermitianForm& h) {
  const VectorXd log_d = log_diagonal(h);
  Eigen::LLT<MatrixXcd> llt(equilibrated(h, log_d));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::GramNotPositive, "Cholesky factorisation failed");
  // Equilibrated Gram = L L^*; the sections with coefficient columns
  // (L^T)^{-1} are orthonormal for the conjugate-linear pairing used here.
  const MatrixXcd lt = MatrixXcd(llt.matrixL()).transpose();
  MatrixXcd c = lt.triangularView<Eigen::Upper>().solve(MatrixXcd::Identity(h.dim(), h.dim()));
  const double global = std::exp(-0.5 * (h.log_scale - h.k * h.shift));
  for (int a = 0; a < h.dim(); ++a) c.row(a) *= std::exp(-0.5 * log_d[a]) * global;
  return c;
}

Weight fs_with_basis(const HermitianForm& h, const Eigen::MatrixXcd& basis_cols, const GridP1& grid) {
  require_resolution(grid, h.k, h.degree);
  const int n = h.dim();
  if (basis_cols.rows() != n || basis_cols.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "basis must be square of size kd + 1");
  }
  const SectionBasis basis(h.k, h.degree);
  const int cols = grid.columns();
  GridField psi(grid);
  const double log_norm = std::log(static_cast<double>(h.degree) / n);
  std::vector<double> t(n);
  VectorXcd e(n);
  for (int i = 0; i < grid.n_u(); ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      t[a] = 0.5 * basis.log_section(a, grid, i);
      top = std::max(top, t[a]);
    }
    for (int j = 0; j < cols; ++j) {
      const double alpha = grid.longitude(j);
      for (int a = 0; a < n; ++a) e[a] = std::polar(std::exp(t[a] - top), a * alpha);
      const double b = (basis_cols.transpose() * e).squaredNorm();
      psi[static_cast<std::size_t>(i) * cols + j] = (log_norm + 2.0 * top + std::log(b)) / h.k - h.shift;
    }
  }
  return Weight(h.degree, std::move(psi), h.shift);
}

GridField bergman_rho(const Weight& phi, const MeasureSetting& s, int k) {
  const HermitianForm h = hilb(phi, s, k);
  const SectionBasis basis(k, phi.degree());
  const VectorXd log_d = log_diagonal(h);
  const MatrixXcd kernel = h.diagonal ? MatrixXcd() : eigen_inverse(equilibrated(h, log_d));
  const GridField log_b = log_bergman_density(basis, log_d, kernel, phi.grid());
  const double gauge_factor = -s.sign() * phi.gauge();
  GridField rho(phi.grid());
  for (std::size_t p = 0; p < rho.size(); ++p) {
    rho[p] = std::exp(log_b[p] - h.log_scale - k * phi.psi()[p] + gauge_factor);
  }
  return rho;
}

Increment f_functional(const Weight& phi, const MeasureSetting& s, int k) {
  const HermitianForm h = hilb(phi, s, k);
  const SectionBasis basis(k, phi.degree());
  const VectorXd log_d = log_diagonal(h);
  const MatrixXcd kernel = h.diagonal ? MatrixXcd() : eigen_inverse(equilibrated(h, log_d));
  const GridField log_b = log_bergman_density(basis, log_d, kernel, phi.grid());
  const double log_norm = std::log(static_cast<double>(phi.degree()) / basis.dim());
  Increment out;
  out.field = GridField(phi.grid());
  for (std::size_t p = 0; p < out.field.size(); ++p) {
    out.field[p] = (log_norm + log_b[p] - h.log_scale) / k - phi.psi()[p];
  }
  out.gauge = -s.sign() * phi.gauge() / k;
  return out;
}

Weight iterate_once(const Weight& phi, const MeasureSetting& s, int k) {
  return fs(hilb(phi, s, k), phi.grid());
}

IterationRun iterate_with_forms(const Weight& phi0, const MeasureSetting& s, int k, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "iteration count must be non-negative");
  IterationRun run;
  run.weights.reserve(m + 1);
  run.weights.push_back(phi0);
  for (int j = 0; j < m; ++j) {
    try {
      run.forms.push_back(hilb(run.weights.back(), s, k));
      run.weights.push_back(fs(run.forms.back(), phi0.grid()));
    } catch (const Error& e) {
      throw Error(e.code(), "iteration step " + std::to_string(j + 1) + " of " + std::to_string(m) +
                                " at k = " + std::to_string(k) + " failed: " + e.what());
    }
  }
  return run;
}

std::vector<Weight> iterate(const Weight& phi0, const MeasureSetting& s, int k, int m) {
  return iterate_with_forms(phi0, s, k, m).weights;
}

double dk_distance(const HermitianForm& h0, const HermitianForm& h1) {
  if (h0.k != h1.k || h0.degree != h1.degree || h0.dim() != h1.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "forms live on different section spaces");
  }
  const VectorXd log_d = log_diagonal(h0);
  Eigen::LLT<MatrixXcd> llt(equilibrated(h0, log_d));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::GramNotPositive, "Cholesky factorisation failed");
  const int n = h0.dim();
  MatrixXcd m1 = h1.matrix;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) m1(a, b) *= std::exp(-0.5 * (log_d[a] + log_d[b]));
  }
  const auto l = llt.matrixL();
  MatrixXcd x = l.solve(m1);
  MatrixXcd reduced = l.solve(x.adjoint()).adjoint();
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(reduced, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::GramNotPositive, "eigenvalue solver failed");
  const double offset = (h1.log_scale - h0.log_scale) - h0.k * (h1.shift - h0.shift);
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    const double nu = std::max(es.eigenvalues()[a], 1e-300);
    const double lambda = -0.5 * (std::log(nu) + offset);
    sum += lambda * lambda;
  }
  return std::sqrt(sum);
}

Eigen::MatrixXcd center_of_mass(const HermitianForm& h, const GridP1& grid) {
  const Weight w = fs(h, grid);
  const GridField& ma = w.ma();
  const SectionBasis basis(h.k, h.degree);
  const int n = h.dim();
  const VectorXd log_d = log_diagonal(h);
  MatrixXcd out = MatrixXcd::Zero(n, n);
  std::vector<double> t(n);
  const int cols = grid.columns();

  if (is_numerically_diagonal(h)) {
    std::vector<double> acc(n, 0.0);
    for (int i = 0; i < grid.n_u(); ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < n; ++a) {
        t[a] = basis.log_section(a, grid, i) - log_d[a];
        top = std::max(top, t[a]);
      }
      double total = 0.0;
      for (int a = 0; a < n; ++a) {
        t[a] = std::exp(t[a] - top);
        total += t[a];
      }
      for (int j = 0; j < cols; ++j) {
        const double f = node_weight(grid, i) * ma[static_cast<std::size_t>(i) * cols + j] / total;
        for (int a = 0; a < n; ++a) acc[a] += f * t[a];
      }
    }
    for (int a = 0; a < n; ++a) out(a, a) = h.k * acc[a];
    return out;
  }

  Eigen::LLT<MatrixXcd> llt(equilibrated(h, log_d));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::GramNotPositive, "Cholesky factorisation failed");
  const auto l = llt.matrixL();
  VectorXcd e(n);
  for (int i = 0; i < grid.n_u(); ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      t[a] = 0.5 * (basis.log_section(a, grid, i) - log_d[a]);
      top = std::max(top, t[a]);
    }
    for (int j = 0; j < cols; ++j) {
      const double alpha = grid.longitude(j);
      for (int a = 0; a < n; ++a) e[a] = std::polar(std::exp(t[a] - top), a * alpha);
      const VectorXcd y = l.solve(e);
      const double f = node_weight(grid, i) * ma[static_cast<std::size_t>(i) * cols + j] / y.squaredNorm();
      out.noalias() += f * (y * y.adjoint());
    }
  }
  out *= static_cast<double>(h.k);
  return 0.5 * (out + out.adjoint());
}

double operator_norm(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

BalancedResult balanced(const MeasureSetting& s, int k, const Weight& start,
                        const BalancedOptions& options) {
  BalancedResult result{start, {}, false, {}};
  if (s.kind() == potential::SettingKind::Sminus) {
    result.warning =
        "S- has no balanced weight in general; the search is best effort and capped at " +
        std::to_string(options.max_iter) + " steps";
  }
  Weight current = start;
  for (int it = 0; it < options.max_iter; ++it) {
    Weight next = iterate_once(current, s, k);
    const double residual = potential::sup_distance(next, current);
    result.residuals.push_back(residual);
    if (residual < options.tol) {
      result.weight = current;
      result.converged = true;
      return result;
    }
    current = std::move(next);
  }
  result.weight = current;
  if (s.kind() != potential::SettingKind::Sminus) {
    throw BalancedNoConvergence("no balanced weight within " + std::to_string(options.max_iter) +
                                    " steps (last residual " +
                                    std::to_string(result.residuals.back()) + ")",
                                result.residuals);
  }
  return result;
}

}  // namespace bergman::core
