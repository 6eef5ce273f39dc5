#include "bergman/potential.hpp"

#include <cmath>
#include <string>

#include "bergman/error.hpp"

namespace bergman::potential {

namespace {

void require_positive(const GridField& f, ErrorCode code, const char* what) {
  for (std::size_t n = 0; n < f.size(); ++n) {
    if (!(f[n] > 0.0)) {
      throw Error(code, std::string(what) + " is not positive at node " + std::to_string(n) +
                            " (value " + std::to_string(f[n]) + ")");
    }
  }
}

void require_same_grid(const GridP1& a, const GridP1& b) {
  if (a != b) throw Error(ErrorCode::GridMismatch, "weight and measure live on different grids");
}

}  // namespace

Weight::Weight(int degree, GridField psi, double gauge)
    : degree_(degree), psi_(std::move(psi)), gauge_(gauge) {
  if (degree_ < 1) throw Error(ErrorCode::InvalidArgument, "degree must be positive");
  if (!psi_.all_finite()) throw Error(ErrorCode::NonFiniteField, "weight has non-finite samples");
  if (!std::isfinite(gauge_)) throw Error(ErrorCode::NonFiniteField, "weight gauge is not finite");
  // psi is a small correction to a potential of size d, and its rounding
  // level is set by the latter.
  auto ma = std::make_shared<GridField>(geometry::laplacian_ref(psi_, degree_));
  *ma += static_cast<double>(degree_);
  require_positive(*ma, ErrorCode::NotKahler, "Monge-Ampere density");
  ma_ = std::move(ma);
}

Weight Weight::round(int degree, const GridP1& grid) { return Weight(degree, GridField(grid)); }

Weight Weight::from_modes(int degree, const GridP1& grid, std::span<const Mode> modes,
                          double gauge) {
  return Weight(degree, GridField::from_modes(grid, modes), gauge);
}

Weight Weight::shifted(double c) const {
  Weight out = *this;
  out.gauge_ += c;
  return out;
}

Weight Weight::on(const GridP1& grid) const {
  if (grid == this->grid()) return *this;
  return Weight(degree_, geometry::resample(psi_, grid), gauge_);
}

MeasureSetting::MeasureSetting(SettingKind kind, GridField base)
    : kind_(kind), base_(std::move(base)) {
  if (!base_.all_finite()) throw Error(ErrorCode::NonFiniteField, "measure has non-finite samples");
  require_positive(base_, ErrorCode::InvalidArgument, "measure density");
}

MeasureSetting MeasureSetting::s0(GridField density, int degree) {
  if (degree > 0) {
    const double mass = geometry::integrate(density);
    density *= degree / mass;
  }
  return MeasureSetting(SettingKind::S0, std::move(density));
}

MeasureSetting MeasureSetting::splus(GridField base) {
  return MeasureSetting(SettingKind::Splus, std::move(base));
}

MeasureSetting MeasureSetting::sminus(GridField base) {
  return MeasureSetting(SettingKind::Sminus, std::move(base));
}

MeasureSetting MeasureSetting::sminus_calibrated(const GridP1& grid, int degree) {
  return MeasureSetting(SettingKind::Sminus, GridField(grid, static_cast<double>(degree)));
}

int MeasureSetting::sign() const {
  switch (kind_) {
    case SettingKind::S0: return 0;
    case SettingKind::Splus: return 1;
    case SettingKind::Sminus: return -1;
  }
  return 0;
}

MeasureSetting MeasureSetting::on(const GridP1& grid) const {
  if (grid == this->grid()) return *this;
  return MeasureSetting(kind_, geometry::resample(base_, grid));
}

std::string_view to_string(SettingKind kind) {
  switch (kind) {
    case SettingKind::S0: return "S0";
    case SettingKind::Splus: return "Splus";
    case SettingKind::Sminus: return "Sminus";
  }
  return "unknown";
}

GridField ma_density(const Weight& phi) { return phi.ma(); }

GridField mu_shape(const Weight& phi, const MeasureSetting& s) {
  require_same_grid(phi.grid(), s.grid());
  if (s.sign() == 0) return s.base();
  const double sign = s.sign();
  GridField out = s.base();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] *= std::exp(sign * phi.psi()[n]);
  return out;
}

GridField mu_of(const Weight& phi, const MeasureSetting& s) {
  GridField out = mu_shape(phi, s);
  if (s.sign() != 0) out *= std::exp(s.sign() * phi.gauge());
  return out;
}

GridField log_ma_over_mu(const Weight& phi, const MeasureSetting& s) {
  require_same_grid(phi.grid(), s.grid());
  const GridField& ma = phi.ma();
  GridField out(phi.grid());
  const double sign = s.sign();
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = std::log(ma[n]) - std::log(s.base()[n]) - sign * (phi.psi()[n] + phi.gauge());
  }
  return out;
}

GridField scalar_curvature(const Weight& phi) {
  const GridField& f = phi.ma();
  GridField lap = geometry::laplacian_ref(geometry::log(f), 1.0);
  GridField out(phi.grid());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = (2.0 - lap[n]) / f[n];
  return out;
}

double mean_scalar_curvature(int degree) { return 2.0 / degree; }

GridField laplacian_phi(const Weight& phi, const GridField& f, double noise_scale) {
  require_same_grid(phi.grid(), f.grid());
  return geometry::laplacian_ref(f, noise_scale) / phi.ma();
}

double sup_distance(const Weight& a, const Weight& b) {
  if (a.degree() != b.degree()) {
    throw Error(ErrorCode::DegreeMismatch, "weights have degrees " + std::to_string(a.degree()) +
                                               " and " + std::to_string(b.degree()));
  }
  require_same_grid(a.grid(), b.grid());
  const double dg = a.gauge() - b.gauge();
  double sup = 0.0;
  for (std::size_t n = 0; n < a.psi().size(); ++n) {
    sup = std::max(sup, std::abs((a.psi()[n] - b.psi()[n]) + dg));
  }
  return sup;
}

}  // namespace bergman::potential
