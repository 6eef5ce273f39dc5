#include "bergman/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "bergman/error.hpp"

namespace bergman::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the fifth and fourth order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kAlpha = 0.7 / 5.0;
constexpr double kBeta = 0.4 / 5.0;

}  // namespace

Stats integrate(const Rhs& f, double t0, const State& y0, double t1, const Control& ctrl,
                const Observer& observe, const StepLimit& limit) {
  if (!(t1 >= t0)) throw Error(ErrorCode::InvalidArgument, "integration interval is reversed");
  const std::size_t n = y0.size();
  std::vector<double> stops;
  for (double t : ctrl.required_times) {
    if (t > t0 && t < t1) stops.push_back(t);
  }
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(t1);

  Stats stats;
  State y = y0;
  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  f(t0, y, k1);
  if (observe) observe(t0, y, k1);
  if (t1 == t0) return stats;

  double t = t0;
  double h = ctrl.initial_step;
  double err_prev = 1.0;
  std::size_t next_stop = 0;
  stats.smallest_step = t1 - t0;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= ctrl.max_steps) {
      throw Error(ErrorCode::NoConvergence, "integrator exceeded " + std::to_string(ctrl.max_steps) + " steps");
    }
    double h_cap = ctrl.max_step;
    if (limit) h_cap = std::min(h_cap, limit(t, y));
    h = std::min(h, h_cap);
    const double h_free = h;
    const double target = stops[next_stop];
    bool lands = false;
    if (t + h >= target || target - (t + h) < 1e-3 * h) {
      h = target - t;
      lands = true;
    }
    if (h < ctrl.min_step && !lands) {
      throw Error(ErrorCode::MinStepReached, "step size fell below " + std::to_string(ctrl.min_step) +
                                                 " at t = " + std::to_string(t));
    }

    bool positivity = true;
    try {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      f(t + c[1] * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      f(t + c[2] * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      f(t + c[3] * h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      }
      f(t + c[4] * h, tmp, k5);
      for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      f(t + h, tmp, k6);
      for (std::size_t i = 0; i < n; ++i) {
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      }
      f(t + h, ynew, k7);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PositivityLost) throw;
      positivity = false;
    }
    if (!positivity) {
      ++stats.rejected;
      ++stats.positivity_rejections;
      h *= 0.5;
      if (h < ctrl.min_step) {
        throw Error(ErrorCode::MinStepReached,
                    "positivity could not be kept with steps above " + std::to_string(ctrl.min_step));
      }
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = ctrl.atol + ctrl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      t = lands ? target : t + h;
      if (lands) ++next_stop;
      y.swap(ynew);
      k1.swap(k7);
      ++stats.accepted;
      stats.smallest_step = std::min(stats.smallest_step, h);
      stats.largest_step = std::max(stats.largest_step, h);
      if (observe) observe(t, y, k1);
      const double e = std::max(err, 1e-10);
      double factor = ctrl.safety * std::pow(e, -kAlpha) * std::pow(err_prev, kBeta);
      factor = std::clamp(factor, 0.2, 5.0);
      err_prev = e;
      // A step shortened to land on a stop says nothing about the next one.
      h = lands ? std::max(h_free, h) : h * factor;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, ctrl.safety * std::pow(err, -0.2));
      if (h < ctrl.min_step) {
        throw Error(ErrorCode::MinStepReached, "step size fell below " + std::to_string(ctrl.min_step) +
                                                   " at t = " + std::to_string(t));
      }
    }
  }
  return stats;
}

}  // namespace bergman::ode
