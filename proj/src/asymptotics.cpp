#include "bergman/asymptotics.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>

#include "bergman/core.hpp"
#include "bergman/error.hpp"
#include "bergman/fit.hpp"

namespace bergman::asymptotics {

namespace {

// T0 at a weight whose flow velocity is log(MA / mu).
GridField source_at(const Weight& phi, const MeasureSetting& s) {
  const GridField rate = potential::log_ma_over_mu(phi, s);
  GridField phi_ddot = potential::laplacian_phi(phi, rate, 1.0);
  if (s.sign() != 0) phi_ddot -= rate * static_cast<double>(s.sign());
  return b1_bar(phi, s) - 0.5 * phi_ddot;
}

}  // namespace

GridField b1_coefficient(const Weight& phi, const MeasureSetting& s) {
  return 0.5 * potential::scalar_curvature(phi) +
         potential::laplacian_phi(phi, potential::log_ma_over_mu(phi, s), 1.0);
}

GridField b1_bar(const Weight& phi, const MeasureSetting& s) {
  return b1_coefficient(phi, s) - 0.5 * potential::mean_scalar_curvature(phi.degree());
}

ExpansionReport expansion_residual(const Weight& phi, const MeasureSetting& s, const std::vector<int>& ks) {
  if (ks.size() < 3) throw Error(ErrorCode::InvalidArgument, "the expansion check needs at least three levels");
  for (std::size_t j = 0; j < ks.size(); ++j) {
    if (ks[j] < 1 || (j > 0 && ks[j] <= ks[j - 1])) {
      throw Error(ErrorCode::InvalidArgument, "levels must be positive and strictly ascending");
    }
  }
  ExpansionReport report;
  std::vector<std::pair<double, double>> points;
  for (int k : ks) {
    const GridP1 grid = GridP1::for_level(k, phi.degree(), phi.grid().invariant());
    const Weight w = phi.on(grid);
    const MeasureSetting sk = s.on(grid);
    const GridField rho = core::bergman_rho(w, sk, k);
    const GridField remainder = rho * potential::mu_of(w, sk) / w.ma() - (b1_coefficient(w, sk) + k);
    const double r = remainder.max_abs();
    if (!std::isfinite(r)) throw Error(ErrorCode::NonFiniteField, "non-finite expansion remainder at k = " + std::to_string(k));
    report.ks.push_back(k);
    report.residuals.push_back(r);
    points.emplace_back(k, r);
  }
  try {
    report.slope = fit_rate(points).slope;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFit) throw;
  }
  return report;
}

GridField correction_source(const FlowTrajectory& traj, double t) {
  return source_at(krf::dense_output(traj, t), traj.setting());
}

GridField CorrectionField::at(double t) const {
  krf::require_time(times_, t);
  return krf::hermite_interpolate(times_, eta_, rate_, t);
}

void CorrectionField::append(double t, GridField eta, GridField rate, GridField source) {
  times_.push_back(t);
  eta_.push_back(std::move(eta));
  rate_.push_back(std::move(rate));
  source_.push_back(std::move(source));
}

CorrectionField solve_eta1(const FlowTrajectory& traj, const krf::FlowControl& ctrl, double source_scale) {
  const GridP1& grid = traj.grid();
  const MeasureSetting& s = traj.setting();
  const double sign = s.sign();
  const double t_end = traj.final_time();
  const double l_top = grid.n_u() - 1.0;
  const double lambda_ref = l_top * (l_top + 1.0);

  auto rhs_at = [&](double t, const ode::State& y, GridField* source_out) {
    const Weight phi = krf::dense_output(traj, std::min(t, t_end));
    const GridField eta(grid, y);
    GridField source = source_at(phi, s);
    GridField rate = potential::laplacian_phi(phi, eta, 1.0) + source_scale * source;
    if (sign != 0.0) rate -= sign * eta;
    if (source_out) *source_out = std::move(source);
    return rate;
  };
  const ode::Rhs rhs = [&](double t, const ode::State& y, ode::State& dydt) {
    const GridField rate = rhs_at(t, y, nullptr);
    dydt.assign(rate.values().begin(), rate.values().end());
  };
  const ode::StepLimit limit = [&](double t, const ode::State&) {
    return ctrl.stability_factor * krf::dense_output(traj, std::min(t, t_end)).ma().min() / lambda_ref;
  };

  CorrectionField field(traj.degree());
  const ode::Observer observe = [&](double t, const ode::State& y, const ode::State& dydt) {
    GridField source(grid);
    rhs_at(t, y, &source);
    field.append(t, GridField(grid, y), GridField(grid, dydt), std::move(source) * source_scale);
  };
  ode::Control oc;
  oc.rtol = ctrl.rtol;
  oc.atol = ctrl.atol;
  oc.initial_step = ctrl.initial_step;
  oc.min_step = ctrl.min_step;
  oc.max_step = ctrl.max_step;
  oc.required_times = ctrl.required_times;
  const ode::State y0(grid.size(), 0.0);
  field.set_stats(ode::integrate(rhs, 0.0, y0, t_end, oc, observe, limit));
  return field;
}

double claim_residual(const FlowTrajectory& traj, const CorrectionField* eta1, int k, double t) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const double t1 = t + 1.0 / k;
  krf::require_time(traj.times(), t);
  krf::require_time(traj.times(), t1);
  const GridP1 grid = GridP1::for_level(k, traj.degree(), traj.grid().invariant());
  auto tilde = [&](double time) {
    GridField psi = krf::dense_output(traj, time).psi();
    if (eta1 != nullptr) psi += eta1->at(time) * (1.0 / k);
    return geometry::resample(psi, grid);
  };
  const GridField p0 = tilde(t);
  const GridField p1 = tilde(t1);
  const Weight w0(traj.degree(), p0);
  const core::Increment inc = core::f_functional(w0, traj.setting().on(grid), k);
  return (p1 - p0 - inc.total()).max_abs();
}

void write_sweep_csv(const std::vector<int>& ks, const std::vector<double>& residuals, std::ostream& out) {
  if (ks.size() != residuals.size()) throw Error(ErrorCode::DimensionMismatch, "k and residual lists differ in length");
  out << "k,residual,slope_so_far\n";
  std::vector<std::pair<double, double>> points;
  char buf[96];
  for (std::size_t j = 0; j < ks.size(); ++j) {
    points.emplace_back(ks[j], residuals[j]);
    std::snprintf(buf, sizeof buf, "%d,%.17g,", ks[j], residuals[j]);
    out << buf;
    if (points.size() >= 3) {
      try {
        std::snprintf(buf, sizeof buf, "%.17g", fit_rate(points).slope);
        out << buf;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateFit) throw;
        out << "exact";
      }
    }
    out << '\n';
  }
}

}  // namespace bergman::asymptotics
