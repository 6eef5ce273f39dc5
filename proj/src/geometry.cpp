#include "bergman/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bergman/error.hpp"

namespace bergman::geometry {

namespace {

using cplx = std::complex<double>;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Gauss-Legendre nodes by Newton iteration in theta. Returns theta in
// ascending order (so u descending) and the matching weights.
void gauss_legendre_theta(int n, std::vector<double>& theta, std::vector<double>& weight) {
  theta.assign(n, 0.0);
  weight.assign(n, 0.0);
  const int half = n / 2;
  auto evaluate = [n](double x, double& pn, double& dpn) {
    double p0 = 1.0;
    double p1 = x;
    for (int l = 1; l < n; ++l) {
      const double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
      p0 = p1;
      p1 = p2;
    }
    pn = p1;
    dpn = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < half; ++i) {
    double th = std::numbers::pi * (4.0 * (i + 1) - 1.0) / (4.0 * n + 2.0);
    for (int it = 0; it < 100; ++it) {
      double pn = 0.0;
      double dpn = 0.0;
      evaluate(std::cos(th), pn, dpn);
      const double step = pn / (-std::sin(th) * dpn);
      th -= step;
      if (std::abs(step) < 4.0 * kEps) break;
    }
    double pn = 0.0;
    double dpn = 0.0;
    evaluate(std::cos(th), pn, dpn);
    const double s = std::sin(th);
    theta[i] = th;
    weight[i] = 2.0 / (s * s * dpn * dpn);
    theta[n - 1 - i] = std::numbers::pi - th;
    weight[n - 1 - i] = weight[i];
  }
  if (n % 2 == 1) {
    const double th = std::numbers::pi / 2.0;
    double pn = 0.0;
    double dpn = 0.0;
    evaluate(0.0, pn, dpn);
    theta[half] = th;
    weight[half] = 2.0 / (dpn * dpn);
  }
}

double kappa(int m) { return m == 0 ? 1.0 : 2.0; }

}  // namespace

struct GridP1::Tables {
  int n_u = 0;
  int n_long = 0;
  double tolerance = 1e-8;
  std::vector<QuadratureNode> nodes;
  std::vector<double> theta;
  std::vector<double> sin_theta;
  std::vector<double> log_s2;
  std::vector<double> log_c2;
  std::vector<double> legendre;  // [l * n_u + i]
};

GridP1::GridP1(int n_u, int n_long, double resolution_tolerance) {
  if (n_u < 1) throw Error(ErrorCode::InvalidArgument, "GridP1 needs n_u >= 1");
  if (n_long != 0 && (n_long < 2 * n_u || n_long % 2 != 0)) {
    throw Error(ErrorCode::InvalidArgument,
                "GridP1 longitude count must be 0 or an even number >= 2 n_u");
  }
  auto t = std::make_shared<Tables>();
  t->n_u = n_u;
  t->n_long = n_long;
  t->tolerance = resolution_tolerance;

  std::vector<double> th;
  std::vector<double> w;
  gauss_legendre_theta(n_u, th, w);
  // Store with u ascending, i.e. theta descending.
  t->nodes.resize(n_u);
  t->theta.resize(n_u);
  t->sin_theta.resize(n_u);
  t->log_s2.resize(n_u);
  t->log_c2.resize(n_u);
  for (int i = 0; i < n_u; ++i) {
    const int src = n_u - 1 - i;
    const double angle = th[src];
    t->theta[i] = angle;
    t->nodes[i] = {std::cos(angle), w[src]};
    t->sin_theta[i] = std::sin(angle);
    t->log_s2[i] = 2.0 * std::log(std::sin(0.5 * angle));
    t->log_c2[i] = 2.0 * std::log(std::cos(0.5 * angle));
  }
  if (n_u % 2 == 1) t->nodes[n_u / 2].u = 0.0;
  for (int i = 0; i < n_u / 2; ++i) t->nodes[n_u - 1 - i].u = -t->nodes[i].u;

  t->legendre.assign(static_cast<std::size_t>(n_u) * n_u, 0.0);
  for (int i = 0; i < n_u; ++i) {
    const double x = t->nodes[i].u;
    double p0 = 1.0;
    double p1 = x;
    t->legendre[i] = 1.0;
    if (n_u > 1) t->legendre[static_cast<std::size_t>(n_u) + i] = x;
    for (int l = 1; l + 1 < n_u; ++l) {
      const double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
      t->legendre[static_cast<std::size_t>(l + 1) * n_u + i] = p2;
      p0 = p1;
      p1 = p2;
    }
  }
  tables_ = std::move(t);
}

GridP1 GridP1::for_level(int k, int degree, bool invariant, double resolution_tolerance) {
  if (k < 1 || degree < 1) throw Error(ErrorCode::InvalidArgument, "k and degree must be positive");
  const int n_u = std::max(256, 8 * k * degree);
  return GridP1(n_u, invariant ? 0 : 2 * n_u, resolution_tolerance);
}

int GridP1::n_u() const { return tables_->n_u; }
int GridP1::n_long() const { return tables_->n_long; }
std::size_t GridP1::size() const {
  return static_cast<std::size_t>(tables_->n_u) * static_cast<std::size_t>(columns());
}
const std::vector<QuadratureNode>& GridP1::nodes() const { return tables_->nodes; }
double GridP1::u(int i) const { return tables_->nodes[i].u; }
double GridP1::theta(int i) const { return tables_->theta[i]; }
double GridP1::sin_theta(int i) const { return tables_->sin_theta[i]; }
double GridP1::longitude(int j) const {
  return invariant() ? 0.0 : 2.0 * std::numbers::pi * j / tables_->n_long;
}
double GridP1::log_sin2_half(int i) const { return tables_->log_s2[i]; }
double GridP1::log_cos2_half(int i) const { return tables_->log_c2[i]; }
double GridP1::legendre(int l, int i) const {
  return tables_->legendre[static_cast<std::size_t>(l) * tables_->n_u + i];
}
double GridP1::resolution_tolerance() const { return tables_->tolerance; }
GridP1 GridP1::doubled() const {
  return GridP1(2 * n_u(), invariant() ? 0 : 2 * n_long(), resolution_tolerance());
}
bool GridP1::operator==(const GridP1& other) const {
  return tables_ == other.tables_ ||
         (n_u() == other.n_u() && n_long() == other.n_long());
}

// ---------------------------------------------------------------------------
// GridField

GridField::GridField(GridP1 grid, double value)
    : grid_(std::move(grid)), values_(grid_.size(), value) {}

GridField::GridField(GridP1 grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "GridField value count does not match its grid");
  }
}

GridField GridField::from_function(GridP1 grid,
                                   const std::function<double(double, double)>& f) {
  GridField out(grid);
  const int cols = grid.columns();
  for (int i = 0; i < grid.n_u(); ++i) {
    for (int j = 0; j < cols; ++j) {
      out.values_[static_cast<std::size_t>(i) * cols + j] = f(grid.u(i), grid.longitude(j));
    }
  }
  return out;
}

GridField GridField::from_modes(GridP1 grid, std::span<const Mode> modes) {
  GridField out(grid);
  const int cols = grid.columns();
  int l_max = 0;
  for (const Mode& mode : modes) {
    if (mode.l < 0 || std::abs(mode.m) > mode.l) {
      throw Error(ErrorCode::InvalidArgument,
                  "mode (" + std::to_string(mode.l) + "," + std::to_string(mode.m) + ") is not valid");
    }
    if (mode.m != 0 && grid.invariant()) {
      throw Error(ErrorCode::GridMismatch, "longitude modes need a grid with n_long > 0");
    }
    l_max = std::max(l_max, mode.l);
  }
  std::vector<double> column(static_cast<std::size_t>(l_max) + 1);
  for (int i = 0; i < grid.n_u(); ++i) {
    for (const Mode& mode : modes) {
      const int m = std::abs(mode.m);
      normalized_legendre(m, mode.l, grid.u(i), grid.sin_theta(i), column.data());
      const double schmidt = m == 0 ? 1.0 : std::numbers::sqrt2;
      const double radial = schmidt * std::sqrt(2.0 / (2.0 * mode.l + 1.0)) *
                            column[static_cast<std::size_t>(mode.l - m)];
      for (int j = 0; j < cols; ++j) {
        double angular = 1.0;
        if (mode.m > 0) angular = std::cos(m * grid.longitude(j));
        if (mode.m < 0) angular = std::sin(m * grid.longitude(j));
        out.values_[static_cast<std::size_t>(i) * cols + j] += mode.coefficient * radial * angular;
      }
    }
  }
  return out;
}

double GridField::at(int i, int j) const {
  return values_[static_cast<std::size_t>(i) * grid_.columns() + j];
}

namespace {
void require_same_grid(const GridField& a, const GridField& b) {
  if (a.grid() != b.grid()) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}
}  // namespace

GridField& GridField::operator+=(const GridField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
  return *this;
}
GridField& GridField::operator-=(const GridField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= other.values_[n];
  return *this;
}
GridField& GridField::operator*=(const GridField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] *= other.values_[n];
  return *this;
}
GridField& GridField::operator/=(const GridField& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] /= other.values_[n];
  return *this;
}
GridField& GridField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}
GridField& GridField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}
double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }
bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(GridField a, const GridField& b) { return a *= b; }
GridField operator/(GridField a, const GridField& b) { return a /= b; }
GridField operator+(GridField a, double c) { return a += c; }
GridField operator-(GridField a, double c) { return a += -c; }
GridField operator*(GridField a, double c) { return a *= c; }
GridField operator*(double c, GridField a) { return a *= c; }
GridField operator-(GridField a) { return a *= -1.0; }

GridField exp(const GridField& f) {
  return f.map([](double v) { return std::exp(v); });
}
GridField log(const GridField& f) {
  return f.map([](double v) { return std::log(v); });
}

// ---------------------------------------------------------------------------
// Spectral machinery

void normalized_legendre(int m, int l_max, double u, double sin_theta, double* out) {
  if (m > l_max) return;
  double pmm = std::sqrt(0.5);
  for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_theta;
  out[0] = pmm;
  if (l_max == m) return;
  double p_prev = pmm;
  double p_curr = std::sqrt(2.0 * m + 3.0) * u * pmm;
  out[1] = p_curr;
  for (int l = m + 2; l <= l_max; ++l) {
    const double l2 = static_cast<double>(l) * l;
    const double m2 = static_cast<double>(m) * m;
    const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
    const double lm1 = l - 1.0;
    const double b = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
    const double p_next = a * (u * p_curr - b * p_prev);
    out[l - m] = p_next;
    p_prev = p_curr;
    p_curr = p_next;
  }
}

namespace {

// Legendre coefficients in the P_l basis of an invariant field.
std::vector<double> legendre_coefficients(const GridField& f) {
  const GridP1& g = f.grid();
  const int n = g.n_u();
  std::vector<double> weighted(n);
  for (int i = 0; i < n; ++i) weighted[i] = g.nodes()[i].weight * f[static_cast<std::size_t>(i)];
  std::vector<double> a(n, 0.0);
  for (int l = 0; l < n; ++l) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += weighted[i] * g.legendre(l, i);
    a[l] = 0.5 * (2.0 * l + 1.0) * s;
  }
  return a;
}

std::vector<double> legendre_synthesis(const GridP1& g, const std::vector<double>& a) {
  const int n = g.n_u();
  std::vector<double> out(n, 0.0);
  for (int l = 0; l < n; ++l) {
    const double c = a[l];
    if (c == 0.0) continue;
    for (int i = 0; i < n; ++i) out[i] += c * g.legendre(l, i);
  }
  return out;
}

// Rounding floor of the l-th orthonormal coefficient of a field bounded by
// `scale` on a grid with n nodes.
double rounding_floor(int l, int n, double scale) {
  return 8.0 * kEps * std::sqrt(static_cast<double>(n)) * std::sqrt(2.0 * l + 1.0) * scale;
}

// Zeros the coefficients above the last one that clears the rounding floor.
// Returns the retained degree.
int chop_legendre(std::vector<double>& a, int n, double scale) {
  int keep = 0;
  for (int l = static_cast<int>(a.size()) - 1; l >= 0; --l) {
    const double orthonormal = std::abs(a[l]) * std::sqrt(2.0 / (2.0 * l + 1.0));
    if (orthonormal > rounding_floor(l, n, scale)) {
      keep = l;
      break;
    }
  }
  for (std::size_t l = keep + 1; l < a.size(); ++l) a[l] = 0.0;
  return keep;
}

int chop_spectral(SpectralCoefficients& c, int n, double scale) {
  int keep = 0;
  for (int m = 0; m <= c.m_max; ++m) {
    auto& row = c.by_m[m];
    int keep_m = m - 1;
    for (int l = c.l_max; l >= m; --l) {
      if (std::abs(row[l - m]) > rounding_floor(l, n, scale)) {
        keep_m = l;
        break;
      }
    }
    for (int l = keep_m + 1; l <= c.l_max; ++l) row[l - m] = 0.0;
    if (keep_m >= m) keep = std::max(keep, keep_m);
  }
  return keep;
}

void check_resolved_legendre(const std::vector<double>& a, int n, double scale, double tol) {
  if (n < 16) return;
  double head = 0.0;
  double tail = 0.0;
  const int tail_start = n - n / 8;
  for (int l = 0; l < n; ++l) {
    const double c = std::abs(a[l]) * std::sqrt(2.0 / (2.0 * l + 1.0));
    head = std::max(head, c);
    if (l >= tail_start) tail = std::max(tail, c - rounding_floor(l, n, scale));
  }
  if (tail > tol * head && tail > 0.0) {
    throw Error(ErrorCode::ResolutionTooLow,
                "field is not resolved on a grid with n_u = " + std::to_string(n) +
                    " (tail/head = " + std::to_string(tail / head) + ")");
  }
}

void check_resolved_spectral(const SpectralCoefficients& c, int n, double scale, double tol) {
  if (n < 16) return;
  double head = 0.0;
  double tail = 0.0;
  const int tail_start = n - n / 8;
  for (int m = 0; m <= c.m_max; ++m) {
    for (int l = m; l <= c.l_max; ++l) {
      const double v = std::abs(c.by_m[m][l - m]);
      head = std::max(head, v);
      if (l >= tail_start) tail = std::max(tail, v - rounding_floor(l, n, scale));
    }
  }
  if (tail > tol * head && tail > 0.0) {
    throw Error(ErrorCode::ResolutionTooLow,
                "field is not resolved on a grid with n_u = " + std::to_string(n));
  }
}

void require_finite(const GridField& f) {
  if (!f.all_finite()) throw Error(ErrorCode::NonFiniteField, "field has a NaN or infinite sample");
}

struct Twiddles {
  std::vector<double> c;
  std::vector<double> s;
  explicit Twiddles(int n) : c(n), s(n) {
    for (int j = 0; j < n; ++j) {
      c[j] = std::cos(2.0 * std::numbers::pi * j / n);
      s[j] = std::sin(2.0 * std::numbers::pi * j / n);
    }
  }
};

}  // namespace

SpectralCoefficients analyze(const GridField& f) {
  const GridP1& g = f.grid();
  const int n = g.n_u();
  SpectralCoefficients out;
  out.l_max = n - 1;
  if (g.invariant()) {
    out.m_max = 0;
    const std::vector<double> a = legendre_coefficients(f);
    out.by_m.assign(1, std::vector<cplx>(n));
    for (int l = 0; l < n; ++l) out.by_m[0][l] = a[l] * std::sqrt(2.0 / (2.0 * l + 1.0));
    return out;
  }
  const int n_long = g.n_long();
  out.m_max = std::min(n_long / 2 - 1, out.l_max);
  out.by_m.resize(out.m_max + 1);
  for (int m = 0; m <= out.m_max; ++m) out.by_m[m].assign(out.l_max - m + 1, 0.0);

  const Twiddles tw(n_long);
  std::vector<cplx> fourier(out.m_max + 1);
  std::vector<double> column(out.l_max + 1);
  for (int i = 0; i < n; ++i) {
    const double* row = f.values().data() + static_cast<std::size_t>(i) * n_long;
    for (int m = 0; m <= out.m_max; ++m) {
      double re = 0.0;
      double im = 0.0;
      for (int j = 0; j < n_long; ++j) {
        const int idx = static_cast<int>((static_cast<long long>(m) * j) % n_long);
        re += row[j] * tw.c[idx];
        im -= row[j] * tw.s[idx];
      }
      fourier[m] = cplx(re, im) / static_cast<double>(n_long);
    }
    const double w = g.nodes()[i].weight;
    for (int m = 0; m <= out.m_max; ++m) {
      normalized_legendre(m, out.l_max, g.u(i), g.sin_theta(i), column.data());
      const cplx fm = w * fourier[m];
      auto& dst = out.by_m[m];
      for (int l = m; l <= out.l_max; ++l) dst[l - m] += fm * column[l - m];
    }
  }
  for (int l = 0; l <= out.l_max; ++l) out.by_m[0][l] = out.by_m[0][l].real();
  return out;
}

GridField synthesize(const GridP1& g, const SpectralCoefficients& c) {
  GridField out(g);
  const int n = g.n_u();
  const int cols = g.columns();
  int m_top = c.m_max;
  if (g.invariant()) {
    for (int m = 1; m <= c.m_max; ++m) {
      for (const cplx& v : c.by_m[m]) {
        if (std::abs(v) > 0.0) {
          throw Error(ErrorCode::GridMismatch,
                      "cannot place a longitude dependent expansion on an invariant grid");
        }
      }
    }
    m_top = 0;
  } else {
    m_top = std::min(m_top, g.n_long() / 2 - 1);
  }
  const Twiddles tw(g.invariant() ? 1 : g.n_long());
  std::vector<double> column(c.l_max + 1);
  std::vector<cplx> radial(m_top + 1);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m <= m_top; ++m) {
      normalized_legendre(m, c.l_max, g.u(i), g.sin_theta(i), column.data());
      cplx s = 0.0;
      const auto& src = c.by_m[m];
      for (int l = m; l <= c.l_max; ++l) s += src[l - m] * column[l - m];
      radial[m] = s;
    }
    for (int j = 0; j < cols; ++j) {
      double v = radial[0].real();
      for (int m = 1; m <= m_top; ++m) {
        const int idx = static_cast<int>((static_cast<long long>(m) * j) % g.n_long());
        v += 2.0 * (radial[m].real() * tw.c[idx] - radial[m].imag() * tw.s[idx]);
      }
      out[static_cast<std::size_t>(i) * cols + j] = v;
    }
  }
  return out;
}

std::vector<Mode> to_modes(const GridField& f, int l_max, double drop_below) {
  const SpectralCoefficients c = analyze(f);
  std::vector<Mode> modes;
  const int top = std::min(l_max, c.l_max);
  for (int l = 0; l <= top; ++l) {
    const double scale = std::sqrt((2.0 * l + 1.0) / 2.0);
    const double a0 = c.by_m[0][l].real() * scale;
    if (std::abs(a0) > drop_below) modes.push_back({l, 0, a0});
    for (int m = 1; m <= std::min(l, c.m_max); ++m) {
      const cplx v = c.by_m[m][l - m];
      const double cos_part = std::numbers::sqrt2 * v.real() * scale;
      const double sin_part = -std::numbers::sqrt2 * v.imag() * scale;
      if (std::abs(cos_part) > drop_below) modes.push_back({l, m, cos_part});
      if (std::abs(sin_part) > drop_below) modes.push_back({l, -m, sin_part});
    }
  }
  return modes;
}

int effective_degree(const GridField& f, double noise_scale) {
  SpectralCoefficients c = analyze(f);
  return chop_spectral(c, f.grid().n_u(), std::max(f.max_abs(), noise_scale));
}

double integrate(const GridField& f) {
  require_finite(f);
  const GridP1& g = f.grid();
  const int cols = g.columns();
  double total = 0.0;
  for (int i = 0; i < g.n_u(); ++i) {
    double row = 0.0;
    for (int j = 0; j < cols; ++j) row += f[static_cast<std::size_t>(i) * cols + j];
    total += 0.5 * g.nodes()[i].weight * row / cols;
  }
  return total;
}

double integrate(const GridField& f, const GridField& density) {
  require_finite(density);
  return integrate(f * density);
}

GridField laplacian_ref(const GridField& f, double noise_scale) {
  require_finite(f);
  const GridP1& g = f.grid();
  const int n = g.n_u();
  const double scale = std::max(f.max_abs(), noise_scale);
  if (g.invariant()) {
    std::vector<double> a = legendre_coefficients(f);
    check_resolved_legendre(a, n, scale, g.resolution_tolerance());
    chop_legendre(a, n, scale);
    for (int l = 0; l < n; ++l) a[l] *= -static_cast<double>(l) * (l + 1);
    return GridField(g, legendre_synthesis(g, a));
  }
  SpectralCoefficients c = analyze(f);
  check_resolved_spectral(c, n, scale, g.resolution_tolerance());
  chop_spectral(c, n, scale);
  for (int m = 0; m <= c.m_max; ++m) {
    for (int l = m; l <= c.l_max; ++l) c.by_m[m][l - m] *= -static_cast<double>(l) * (l + 1);
  }
  return synthesize(g, c);
}

namespace {

// Coefficients of d_theta^a Phat_l^m expressed over Phat_l^{m + o},
// o in [-4, 4]. Index [o + 4][l].
using LadderTerms = std::array<std::vector<cplx>, 9>;

void apply_theta_derivative(int m, int l_max, LadderTerms& terms) {
  LadderTerms next;
  for (auto& v : next) v.assign(l_max + 1, 0.0);
  for (int o = -4; o <= 4; ++o) {
    const auto& src = terms[o + 4];
    if (src.empty()) continue;
    const int mp = m + o;
    if (mp < 0) continue;
    for (int l = mp; l <= l_max; ++l) {
      const cplx v = src[l];
      if (v == 0.0) continue;
      const double down = std::sqrt(static_cast<double>(l + mp) * (l - mp + 1));
      const double up = std::sqrt(static_cast<double>(l - mp) * (l + mp + 1));
      // d/dtheta Phat^mp = (down Phat^{mp-1} - up Phat^{mp+1}) / 2,
      // with Phat^{-1} = -Phat^{1}.
      if (mp == 0) {
        next[1 - m + 4][l] += -0.5 * (down + up) * v;
      } else {
        next[o - 1 + 4][l] += 0.5 * down * v;
        if (mp + 1 <= l) next[o + 1 + 4][l] += -0.5 * up * v;
      }
    }
  }
  for (auto& v : next) {
    if (std::all_of(v.begin(), v.end(), [](const cplx& x) { return x == 0.0; })) v.clear();
  }
  terms = std::move(next);
}

double derivative_sup(const GridP1& g, const SpectralCoefficients& c, int a, int b) {
  const int m_top = g.invariant() ? 0 : c.m_max;
  if (g.invariant() && b > 0) return 0.0;
  std::vector<LadderTerms> per_m(m_top + 1);
  for (int m = 0; m <= m_top; ++m) {
    LadderTerms& t = per_m[m];
    t[4].assign(c.l_max + 1, 0.0);
    const cplx factor = std::pow(cplx(0.0, static_cast<double>(m)), b);
    for (int l = m; l <= c.l_max; ++l) t[4][l] = c.by_m[m][l - m] * factor;
    for (int s = 0; s < a; ++s) apply_theta_derivative(m, c.l_max, t);
  }
  const int cols = g.columns();
  const Twiddles tw(g.invariant() ? 1 : g.n_long());
  std::vector<double> column(c.l_max + 1);
  std::vector<cplx> radial(m_top + 1);
  double sup = 0.0;
  for (int i = 0; i < g.n_u(); ++i) {
    std::fill(radial.begin(), radial.end(), cplx(0.0));
    for (int mp = 0; mp <= std::min(m_top + 4, c.l_max); ++mp) {
      bool needed = false;
      for (int m = std::max(0, mp - 4); m <= std::min(m_top, mp + 4); ++m) {
        if (!per_m[m][mp - m + 4].empty()) needed = true;
      }
      if (!needed) continue;
      normalized_legendre(mp, c.l_max, g.u(i), g.sin_theta(i), column.data());
      for (int m = std::max(0, mp - 4); m <= std::min(m_top, mp + 4); ++m) {
        const auto& coeff = per_m[m][mp - m + 4];
        if (coeff.empty()) continue;
        cplx s = 0.0;
        for (int l = mp; l <= c.l_max; ++l) s += coeff[l] * column[l - mp];
        radial[m] += s;
      }
    }
    for (int j = 0; j < cols; ++j) {
      double v = radial[0].real();
      for (int m = 1; m <= m_top; ++m) {
        const int idx = static_cast<int>((static_cast<long long>(m) * j) % g.n_long());
        v += kappa(m) * (radial[m].real() * tw.c[idx] - radial[m].imag() * tw.s[idx]);
      }
      sup = std::max(sup, std::abs(v));
    }
  }
  return sup;
}

}  // namespace

double cl_norm(const GridField& f, int l, double noise_scale) {
  if (l < 0 || l > 4) {
    throw Error(ErrorCode::UnsupportedOrder, "C^l norms are available for 0 <= l <= 4");
  }
  require_finite(f);
  double norm = f.max_abs();
  if (l == 0) return norm;
  SpectralCoefficients c = analyze(f);
  chop_spectral(c, f.grid().n_u(), std::max(f.max_abs(), noise_scale));
  for (int order = 1; order <= l; ++order) {
    for (int b = 0; b <= order; ++b) {
      norm = std::max(norm, derivative_sup(f.grid(), c, order - b, b));
    }
  }
  return norm;
}

GridField resample(const GridField& f, const GridP1& target) {
  require_finite(f);
  const GridP1& src = f.grid();
  if (src == target) return GridField(target, std::vector<double>(f.values().begin(), f.values().end()));
  if (!src.invariant()) {
    SpectralCoefficients c = analyze(f);
    if (target.invariant()) {
      const double floor = 1e-12 * std::max(1.0, f.max_abs());
      for (int m = 1; m <= c.m_max; ++m) {
        for (const cplx& v : c.by_m[m]) {
          if (std::abs(v) > floor) {
            throw Error(ErrorCode::GridMismatch,
                        "field depends on longitude and cannot be resampled to an invariant grid");
          }
        }
      }
      c.m_max = 0;
      c.by_m.resize(1);
    }
    return synthesize(target, c);
  }
  const std::vector<double> a = legendre_coefficients(f);
  const int n_src = src.n_u();
  std::vector<double> radial(target.n_u(), 0.0);
  for (int i = 0; i < target.n_u(); ++i) {
    const double x = target.u(i);
    double p0 = 1.0;
    double p1 = x;
    double s = a[0];
    if (n_src > 1) s += a[1] * x;
    for (int l = 1; l + 1 < n_src; ++l) {
      const double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
      s += a[l + 1] * p2;
      p0 = p1;
      p1 = p2;
    }
    radial[i] = s;
  }
  GridField out(target);
  const int cols = target.columns();
  for (int i = 0; i < target.n_u(); ++i) {
    for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] = radial[i];
  }
  return out;
}

}  // namespace bergman::geometry
