#pragma once

// Reference solver for the flow d phi / dt = log(MA(phi) / mu(phi)).
//
// Method of lines: the relative potential is sampled on a grid, the round
// Laplacian is spectral, and time stepping uses the embedded Runge-Kutta
// integrator with a diffusive step limit.

#include <iosfwd>
#include <vector>

#include "bergman/ode.hpp"
#include "bergman/potential.hpp"

namespace bergman::krf {

using geometry::GridField;
using geometry::GridP1;
using potential::MeasureSetting;
using potential::Weight;

struct FlowControl {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 1e-4;
  double min_step = 1e-12;
  double max_step = 0.05;
  /// The step never exceeds stability_factor / lambda_max, with lambda_max
  /// the largest eigenvalue of the weighted Laplacian on the grid.
  double stability_factor = 3.0;
  double horizon = 2.0;
  std::vector<double> required_times;
};

/// MA and mu of one weight together with the flow velocity log(MA / mu).
struct FlowRHSCache {
  GridField ma;
  GridField mu;
  GridField rate;
};
FlowRHSCache evaluate_rhs(const Weight& phi, const MeasureSetting& s);

/// Accepted steps of a flow run. The additive constant of the initial weight
/// is folded into the sampled potential.
class FlowTrajectory {
 public:
  FlowTrajectory(MeasureSetting setting, int degree) : setting_(std::move(setting)), degree_(degree) {}

  const MeasureSetting& setting() const { return setting_; }
  int degree() const { return degree_; }
  const GridP1& grid() const { return setting_.grid(); }
  double final_time() const { return times_.back(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<GridField>& potentials() const { return psi_; }
  const std::vector<GridField>& rates() const { return rate_; }
  const ode::Stats& stats() const { return stats_; }

  void append(double t, GridField psi, GridField rate);
  void set_stats(const ode::Stats& stats) { stats_ = stats; }

 private:
  MeasureSetting setting_;
  int degree_;
  std::vector<double> times_;
  std::vector<GridField> psi_;
  std::vector<GridField> rate_;
  ode::Stats stats_;
};

/// Solves the flow on the grid of phi0 up to time T. Throws OutOfHorizon if
/// T exceeds ctrl.horizon, MinStepReached if positivity cannot be kept.
FlowTrajectory flow_solve(const Weight& phi0, const MeasureSetting& s, double T,
                          const FlowControl& ctrl = {});

/// Throws OutOfHorizon unless t lies in [ts.front(), ts.back()] up to a
/// relative 1e-12.
void require_time(const std::vector<double>& ts, double t);

/// Cubic Hermite interpolation through (ts[j], values[j]) with slopes rates[j].
GridField hermite_interpolate(const std::vector<double>& ts, const std::vector<GridField>& values,
                              const std::vector<GridField>& rates, double t);

/// phi_t by cubic Hermite interpolation between accepted steps.
Weight dense_output(const FlowTrajectory& traj, double t);

/// sup |log(MA(phi) / mu(phi))|.
double stationarity_residual(const Weight& phi, const MeasureSetting& s);

/// d^2 phi / dt^2 = Delta_t phi_dot - sign * phi_dot at time t, with phi_dot
/// evaluated from the equation at the interpolated weight.
GridField second_time_derivative(const FlowTrajectory& traj, double t);

/// Rows "t,sup_psi,stationarity_residual" for every accepted step.
void write_trajectory_csv(const FlowTrajectory& traj, std::ostream& out);

}  // namespace bergman::krf
