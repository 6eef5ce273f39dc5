#pragma once

// Two-term Bergman expansion rho * mu / MA = k + b1 + O(1/k) and the order
// one correction eta1 that upgrades the flow to a third-order approximation
// of the iteration:
//   phi_{t + 1/k} + eta1(t + 1/k) / k - (phi_t + eta1(t) / k) = F(phi_t + eta1(t) / k) + O(1/k^3).

#include <iosfwd>
#include <optional>
#include <vector>

#include "bergman/krf.hpp"

namespace bergman::asymptotics {

using geometry::GridField;
using geometry::GridP1;
using krf::FlowTrajectory;
using potential::MeasureSetting;
using potential::Weight;

/// b1 = S / 2 + Delta_phi log(MA / mu).
GridField b1_coefficient(const Weight& phi, const MeasureSetting& s);

/// b1 - Sbar / 2 with Sbar = 2 / d; integrates to zero against MA.
GridField b1_bar(const Weight& phi, const MeasureSetting& s);

struct ExpansionReport {
  std::vector<int> ks;
  std::vector<double> residuals;  // sup |rho mu / MA - (k + b1)|
  std::optional<double> slope;     // set when there are at least 3 levels
};

/// Evaluates the expansion remainder at every k of an ascending list of at
/// least three levels. phi is resampled to GridP1::for_level for each k.
ExpansionReport expansion_residual(const Weight& phi, const MeasureSetting& s, const std::vector<int>& ks);

/// T0(t) = b1_bar(phi_t) - phi_ddot(t) / 2.
GridField correction_source(const FlowTrajectory& traj, double t);

/// eta1 solved along a flow trajectory, with its time derivative and source at
/// every accepted step.
class CorrectionField {
 public:
  explicit CorrectionField(int degree) : degree_(degree) {}

  const std::vector<double>& times() const { return times_; }
  const std::vector<GridField>& values() const { return eta_; }
  const std::vector<GridField>& rates() const { return rate_; }
  const std::vector<GridField>& sources() const { return source_; }
  const ode::Stats& stats() const { return stats_; }
  int degree() const { return degree_; }

  /// eta1 at time t by cubic Hermite interpolation. OutOfHorizon outside the
  /// solved interval.
  GridField at(double t) const;

  void append(double t, GridField eta, GridField rate, GridField source);
  void set_stats(const ode::Stats& stats) { stats_ = stats; }

 private:
  int degree_;
  std::vector<double> times_;
  std::vector<GridField> eta_;
  std::vector<GridField> rate_;
  std::vector<GridField> source_;
  ode::Stats stats_;
};

/// Solves d eta / dt - Delta_t eta +- eta = source_scale * T0(t), eta(0) = 0,
/// on the trajectory's grid and time span. Delta_t is the Laplacian of the
/// interpolated phi_t.
CorrectionField solve_eta1(const FlowTrajectory& traj, const krf::FlowControl& ctrl = {},
                           double source_scale = 1.0);

/// sup |phi~(t + 1/k) - phi~(t) - F(phi~(t))| with phi~ = phi + eta1 / k
/// (eta1 taken as zero when absent), evaluated on GridP1::for_level(k, d).
double claim_residual(const FlowTrajectory& traj, const CorrectionField* eta1, int k, double t);

/// CSV with columns k,residual,slope_so_far; the slope column is empty until
/// three rows are available.
void write_sweep_csv(const std::vector<int>& ks, const std::vector<double>& residuals, std::ostream& out);

}  // namespace bergman::asymptotics
