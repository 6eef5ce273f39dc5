#pragma once

// Weights on O(d) over the Riemann sphere and the measures built from them.
//
// A weight is stored relative to the reference weight d * log(1 + |z|^2):
//   phi = d * log(1 + |z|^2) + psi + gauge,
// where the additive constant `gauge` is kept apart from the sampled field so
// that shifts phi -> phi + c are exact.

#include <memory>
#include <span>
#include <string_view>

#include "bergman/geometry.hpp"

namespace bergman::potential {

using geometry::GridField;
using geometry::GridP1;
using geometry::Mode;

class Weight {
 public:
  /// Throws NotKahler if d + laplacian_ref(psi) is not positive at every node.
  Weight(int degree, GridField psi, double gauge = 0.0);

  /// The reference weight (psi = 0).
  static Weight round(int degree, const GridP1& grid);
  static Weight from_modes(int degree, const GridP1& grid, std::span<const Mode> modes,
                           double gauge = 0.0);

  int degree() const { return degree_; }
  const GridField& psi() const { return psi_; }
  double gauge() const { return gauge_; }
  const GridP1& grid() const { return psi_.grid(); }

  /// Density of MA(phi) against omega_FS, computed once at construction.
  const GridField& ma() const { return *ma_; }

  /// psi + gauge as a single field.
  GridField relative() const { return psi_ + gauge_; }

  Weight shifted(double c) const;
  /// Spectral interpolation onto another grid.
  Weight on(const GridP1& grid) const;

 private:
  int degree_;
  GridField psi_;
  double gauge_;
  std::shared_ptr<const GridField> ma_;
};

enum class SettingKind { S0, Splus, Sminus };

/// The rule phi -> mu(phi). For S0 the measure is the fixed base density; for
/// S+ and S- it is base * exp(+-(psi + gauge)).
class MeasureSetting {
 public:
  /// Fixed measure. When `degree` is positive the density is rescaled to
  /// total mass `degree`.
  static MeasureSetting s0(GridField density, int degree = 0);
  static MeasureSetting splus(GridField base);
  static MeasureSetting sminus(GridField base);
  /// S- with base d * omega_FS, for which the reference weight is stationary.
  static MeasureSetting sminus_calibrated(const GridP1& grid, int degree);

  SettingKind kind() const { return kind_; }
  /// 0 for S0, +1 for S+, -1 for S-.
  int sign() const;
  const GridField& base() const { return base_; }
  const GridP1& grid() const { return base_.grid(); }

  MeasureSetting on(const GridP1& grid) const;

 private:
  MeasureSetting(SettingKind kind, GridField base);
  SettingKind kind_;
  GridField base_;
};

std::string_view to_string(SettingKind kind);

GridField ma_density(const Weight& phi);

/// Density of mu(phi) against omega_FS.
GridField mu_of(const Weight& phi, const MeasureSetting& s);
/// mu(phi) with the gauge factor exp(+-gauge) left out.
GridField mu_shape(const Weight& phi, const MeasureSetting& s);
/// log(MA(phi) / mu(phi)), evaluated in log form.
GridField log_ma_over_mu(const Weight& phi, const MeasureSetting& s);

/// Scalar curvature of omega_phi, normalised so that the round metric of
/// area d has curvature 2 / d.
GridField scalar_curvature(const Weight& phi);
/// Average of the scalar curvature against MA, which depends only on d.
double mean_scalar_curvature(int degree);

/// (sqrt(-1)/2pi) ddbar f = laplacian_phi(phi, f) * omega_phi.
/// noise_scale is forwarded to geometry::laplacian_ref.
GridField laplacian_phi(const Weight& phi, const GridField& f, double noise_scale = 0.0);

/// sup_X |phi - phi'| including the gauge constants.
double sup_distance(const Weight& a, const Weight& b);

}  // namespace bergman::potential
