#pragma once

// Embedded Runge-Kutta 5(4) (Dormand-Prince) with PI step control, used for
// the flow and for the linear correction equation.

#include <functional>
#include <vector>

namespace bergman::ode {

using State = std::vector<double>;

struct Control {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 1e-4;
  double min_step = 1e-12;
  double max_step = 0.05;
  double safety = 0.9;
  int max_steps = 1000000;
  /// Times the integrator must land on exactly (sorted or not).
  std::vector<double> required_times;
};

struct Stats {
  int accepted = 0;
  int rejected = 0;
  int positivity_rejections = 0;
  double smallest_step = 0.0;
  double largest_step = 0.0;
};

/// Right-hand side f(t, y) -> dydt. It may throw bergman::Error with code
/// PositivityLost, which rejects the step and halves it.
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

/// Upper bound for the next step at an accepted point (e.g. a diffusive
/// stability limit).
using StepLimit = std::function<double(double t, const State& y)>;

/// Called after every accepted step with (t, y, f(t, y)); also called once at
/// the initial point.
using Observer = std::function<void(double t, const State& y, const State& dydt)>;

/// Integrates from (t0, y0) to t1. Throws MinStepReached when the step
/// falls below ctrl.min_step and NoConvergence when max_steps is exceeded.
Stats integrate(const Rhs& f, double t0, const State& y0, double t1, const Control& ctrl,
                const Observer& observe, const StepLimit& limit = {});

}  // namespace bergman::ode
