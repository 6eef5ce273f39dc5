#include "bergman/krf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "bergman/error.hpp"

namespace bergman::krf {

void require_time(const std::vector<double>& ts, double t) {
  if (ts.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  const double tol = 1e-12 * std::max(1.0, ts.back());
  if (!(t >= ts.front() - tol) || !(t <= ts.back() + tol)) {
    throw Error(ErrorCode::OutOfHorizon, "time " + std::to_string(t) + " is outside [" +
                                             std::to_string(ts.front()) + ", " + std::to_string(ts.back()) + "]");
  }
}

GridField hermite_interpolate(const std::vector<double>& ts, const std::vector<GridField>& values,
                              const std::vector<GridField>& rates, double t) {
  if (t <= ts.front()) return values.front();
  if (t >= ts.back()) return values.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ts.begin()) - 1;
  if (t == ts[j]) return values[j];
  const double h = ts[j + 1] - ts[j];
  const double s = (t - ts[j]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  const GridField& p0 = values[j];
  const GridField& p1 = values[j + 1];
  const GridField& v0 = rates[j];
  const GridField& v1 = rates[j + 1];
  GridField out(p0.grid());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = h00 * p0[n] + h10 * h * v0[n] + h01 * p1[n] + h11 * h * v1[n];
  }
  return out;
}

FlowRHSCache evaluate_rhs(const Weight& phi, const MeasureSetting& s) {
  return {phi.ma(), potential::mu_of(phi, s), potential::log_ma_over_mu(phi, s)};
}

void FlowTrajectory::append(double t, GridField psi, GridField rate) {
  times_.push_back(t);
  psi_.push_back(std::move(psi));
  rate_.push_back(std::move(rate));
}

FlowTrajectory flow_solve(const Weight& phi0, const MeasureSetting& s, double T,
                          const FlowControl& ctrl) {
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "final time must be non-negative");
  if (T > ctrl.horizon) {
    throw Error(ErrorCode::OutOfHorizon, "final time " + std::to_string(T) + " exceeds the horizon " +
                                             std::to_string(ctrl.horizon));
  }
  const GridP1& grid = phi0.grid();
  if (grid != s.grid()) throw Error(ErrorCode::GridMismatch, "weight and measure live on different grids");
  const int degree = phi0.degree();
  const double l_top = grid.n_u() - 1.0;
  const double lambda_ref = l_top * (l_top + 1.0);

  // One weight per right-hand side evaluation; NotKahler turns into a step
  // rejection.
  auto make_weight = [&](const ode::State& y) {
    try {
      return Weight(degree, GridField(grid, y));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotKahler) throw Error(ErrorCode::PositivityLost, e.what());
      throw;
    }
  };
  const ode::Rhs rhs = [&](double, const ode::State& y, ode::State& dydt) {
    const Weight w = make_weight(y);
    const GridField rate = potential::log_ma_over_mu(w, s);
    dydt.assign(rate.values().begin(), rate.values().end());
  };
  const ode::StepLimit limit = [&](double, const ode::State& y) {
    const Weight w = make_weight(y);
    return ctrl.stability_factor * w.ma().min() / lambda_ref;
  };

  FlowTrajectory traj(s, degree);
  const ode::Observer observe = [&](double t, const ode::State& y, const ode::State& dydt) {
    traj.append(t, GridField(grid, y), GridField(grid, dydt));
  };
  ode::Control oc;
  oc.rtol = ctrl.rtol;
  oc.atol = ctrl.atol;
  oc.initial_step = ctrl.initial_step;
  oc.min_step = ctrl.min_step;
  oc.max_step = ctrl.max_step;
  oc.required_times = ctrl.required_times;

  const GridField start = phi0.relative();
  const ode::State y0(start.values().begin(), start.values().end());
  traj.set_stats(ode::integrate(rhs, 0.0, y0, T, oc, observe, limit));
  return traj;
}

Weight dense_output(const FlowTrajectory& traj, double t) {
  require_time(traj.times(), t);
  return Weight(traj.degree(), hermite_interpolate(traj.times(), traj.potentials(), traj.rates(), t));
}

double stationarity_residual(const Weight& phi, const MeasureSetting& s) {
  return potential::log_ma_over_mu(phi, s).max_abs();
}

GridField second_time_derivative(const FlowTrajectory& traj, double t) {
  const Weight w = dense_output(traj, t);
  const GridField rate = potential::log_ma_over_mu(w, traj.setting());
  // The rate is a difference of logarithms of order one.
  GridField out = potential::laplacian_phi(w, rate, 1.0);
  if (traj.setting().sign() != 0) out -= rate * static_cast<double>(traj.setting().sign());
  return out;
}

void write_trajectory_csv(const FlowTrajectory& traj, std::ostream& out) {
  out << "t,sup_psi,stationarity_residual\n";
  char buf[128];
  for (std::size_t j = 0; j < traj.times().size(); ++j) {
    const Weight w(traj.degree(), traj.potentials()[j]);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", traj.times()[j], w.psi().max_abs(),
                  stationarity_residual(w, traj.setting()));
    out << buf;
  }
}

}  // namespace bergman::krf
