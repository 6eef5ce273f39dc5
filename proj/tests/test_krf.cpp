#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bergman/error.hpp"
#include "bergman/krf.hpp"
#include "generators.hpp"

using namespace bergman;
using namespace bergman::krf;

namespace {

Weight random_weight(std::mt19937_64& rng, const GridP1& grid, int degree, double gauge = 0.0) {
  const auto modes = testgen::random_weight_modes(rng, degree, 4, !grid.invariant(), 0.3);
  return Weight::from_modes(degree, grid, modes, gauge);
}

GridField random_density(std::mt19937_64& rng, const GridP1& grid) {
  auto modes = testgen::random_modes(rng, 3, !grid.invariant());
  for (auto& m : modes) m.coefficient *= 0.3;
  return geometry::exp(GridField::from_modes(grid, modes));
}

double sup_diff(const GridField& a, const GridField& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("a weight whose own MA is the measure does not move") {
  std::mt19937_64 rng(30);
  const GridP1 grid(32);
  const Weight w = random_weight(rng, grid, 1);
  const auto s = MeasureSetting::s0(w.ma());
  const FlowTrajectory traj = flow_solve(w, s, 1.0);
  for (double t : {0.25, 0.5, 1.0}) CHECK(potential::sup_distance(dense_output(traj, t), w) < 1e-10);
  CHECK(stationarity_residual(w, s) < 1e-14);
}

TEST_CASE("calibrated S- keeps the round weight stationary") {
  for (int d : {1, 3}) {
    const GridP1 grid(32);
    const Weight round = Weight::round(d, grid);
    const auto s = MeasureSetting::sminus_calibrated(grid, d);
    CHECK(stationarity_residual(round, s) < 1e-10);
    const FlowTrajectory traj = flow_solve(round, s, 1.0);
    CHECK(dense_output(traj, 1.0).psi().max_abs() < 1e-10);
    CHECK(second_time_derivative(traj, 0.5).max_abs() < 1e-10);
  }
}

TEST_CASE("S0 flows do not increase the sup distance between two solutions") {
  std::mt19937_64 rng(31);
  const GridP1 grid(32);
  for (int pair = 0; pair < 10; ++pair) {
    const auto s = MeasureSetting::s0(random_density(rng, grid), 1);
    const FlowTrajectory a = flow_solve(random_weight(rng, grid, 1, 0.1), s, 1.0);
    const FlowTrajectory b = flow_solve(random_weight(rng, grid, 1, -0.1), s, 1.0);
    double previous = potential::sup_distance(dense_output(a, 0.0), dense_output(b, 0.0));
    for (int j = 1; j <= 10; ++j) {
      const double t = 0.1 * j;
      const double now = potential::sup_distance(dense_output(a, t), dense_output(b, t));
      CHECK(now <= previous + 1e-10);
      previous = now;
    }
  }
}

TEST_CASE("S+- contraction of constant offsets follows exp(-+t)") {
  std::mt19937_64 rng(32);
  const GridP1 grid(32);
  const Weight w = random_weight(rng, grid, 1);
  for (const auto& s : {MeasureSetting::splus(random_density(rng, grid)),
                        MeasureSetting::sminus(random_density(rng, grid))}) {
    const double c = 0.2;
    const FlowTrajectory a = flow_solve(w, s, 1.0);
    const FlowTrajectory b = flow_solve(w.shifted(c), s, 1.0);
    const double ratio = potential::sup_distance(dense_output(a, 1.0), dense_output(b, 1.0)) / c;
    const double expected = std::exp(-s.sign() * 1.0);
    CHECK(std::abs(ratio / expected - 1.0) < 0.05);
    CHECK(std::abs(ratio / expected - 1.0) < 1e-8);
    // The discrete factors (1 -+ 1/k)^m approach the same limit as m / k -> 1.
    double gap_prev = 1.0;
    for (int k : {8, 16, 32, 64}) {
      const double gap = std::abs(std::pow(1.0 - s.sign() / static_cast<double>(k), k) - expected);
      CHECK(gap < gap_prev);
      gap_prev = gap;
    }
    CHECK(gap_prev < 0.05 * expected);
  }
}

TEST_CASE("dense output reproduces stored steps and refines consistently") {
  std::mt19937_64 rng(33);
  const GridP1 grid(32);
  const Weight w = random_weight(rng, grid, 2, 0.3);
  const auto s = MeasureSetting::s0(random_density(rng, grid), 2);
  const FlowTrajectory traj = flow_solve(w, s, 0.5);
  CHECK(sup_diff(dense_output(traj, 0.0).psi(), w.relative()) == 0.0);
  for (std::size_t j = 0; j < traj.times().size(); j += 17) {
    CHECK(sup_diff(dense_output(traj, traj.times()[j]).psi(), traj.potentials()[j]) == 0.0);
  }
  // Midpoints against a run that places a node there.
  std::vector<double> probes;
  for (std::size_t j = 5; j + 1 < traj.times().size(); j += 40) {
    probes.push_back(0.5 * (traj.times()[j] + traj.times()[j + 1]));
  }
  FlowControl ctrl;
  ctrl.required_times = probes;
  const FlowTrajectory refined = flow_solve(w, s, 0.5, ctrl);
  for (double t : probes) {
    CHECK(sup_diff(dense_output(traj, t).psi(), dense_output(refined, t).psi()) < 1e-7);
  }
  CHECK_THROWS_AS(dense_output(traj, 0.6), Error);
}

TEST_CASE("tolerance halving and volume conservation") {
  std::mt19937_64 rng(34);
  const GridP1 grid(32);
  const Weight w = random_weight(rng, grid, 1);
  const auto s = MeasureSetting::sminus(random_density(rng, grid));
  FlowControl loose;
  FlowControl tight;
  tight.rtol = loose.rtol / 2;
  tight.atol = loose.atol / 2;
  const FlowTrajectory a = flow_solve(w, s, 1.0, loose);
  const FlowTrajectory b = flow_solve(w, s, 1.0, tight);
  CHECK(sup_diff(dense_output(a, 1.0).psi(), dense_output(b, 1.0).psi()) < 1e-8);
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    CHECK(geometry::integrate(dense_output(a, t).ma()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("time stepping converges at high order under step refinement") {
  std::mt19937_64 rng(35);
  const GridP1 grid(12);
  const Weight w = random_weight(rng, grid, 1);
  const auto s = MeasureSetting::s0(random_density(rng, grid), 1);
  FlowControl reference_ctrl;
  reference_ctrl.rtol = reference_ctrl.atol = 1e-13;
  const GridField reference = dense_output(flow_solve(w, s, 0.5, reference_ctrl), 0.5).psi();
  std::vector<double> errors;
  for (double h : {0.02, 0.01, 0.005}) {
    FlowControl fixed;
    fixed.rtol = fixed.atol = 1.0;  // the error control never binds
    fixed.initial_step = h;
    fixed.max_step = h;
    errors.push_back(sup_diff(dense_output(flow_solve(w, s, 0.5, fixed), 0.5).psi(), reference));
  }
  for (std::size_t j = 1; j < errors.size(); ++j) {
    if (errors[j - 1] < 1e-12) continue;
    CHECK(std::log2(errors[j - 1] / errors[j]) >= 2.0);
  }
}

TEST_CASE("spatial resolution converges spectrally") {
  const std::vector<geometry::Mode> modes{{1, 0, 0.05}, {2, 0, -0.03}, {3, 0, 0.01}};
  auto final_on = [&](int n_u, const GridP1& target) {
    const GridP1 grid(n_u);
    const Weight w = Weight::from_modes(1, grid, modes);
    const GridField base = GridField::from_function(grid, [](double u, double) { return std::exp(0.2 * u); });
    const auto s = MeasureSetting::s0(base, 1);
    return geometry::resample(dense_output(flow_solve(w, s, 0.5), 0.5).psi(), target);
  };
  const GridP1 fine(48);
  const GridField reference = final_on(48, fine);
  const double e4 = sup_diff(final_on(4, fine), reference);
  const double e6 = sup_diff(final_on(6, fine), reference);
  const double e8 = sup_diff(final_on(8, fine), reference);
  CHECK(e6 < e4 / 10.0);
  CHECK(e8 < std::max(e6 / 10.0, 1e-10));
  CHECK(sup_diff(final_on(16, fine), reference) < 1e-10);
}

TEST_CASE("second time derivative") {
  std::mt19937_64 rng(36);
  const GridP1 grid(32);
  const Weight w = random_weight(rng, grid, 1);
  const auto s0 = MeasureSetting::s0(random_density(rng, grid), 1);
  const FlowTrajectory traj = flow_solve(w, s0, 0.6);
  const GridField at0 = second_time_derivative(traj, 0.0);
  CHECK(sup_diff(at0, potential::laplacian_phi(w, potential::log_ma_over_mu(w, s0))) < 1e-10);

  for (int trial = 0; trial < 5; ++trial) {
    const auto s = trial % 3 == 0 ? s0
                   : trial % 3 == 1 ? MeasureSetting::splus(random_density(rng, grid))
                                    : MeasureSetting::sminus(random_density(rng, grid));
    const Weight start = random_weight(rng, grid, 1);
    const double t = testgen::uniform(rng, 0.1, 0.5);
    const double h = 1e-3;
    FlowControl ctrl;
    ctrl.required_times = {t - 2 * h, t - h, t, t + h, t + 2 * h};
    const FlowTrajectory run = flow_solve(start, s, 0.6, ctrl);
    auto rate = [&](double time) { return potential::log_ma_over_mu(dense_output(run, time), s); };
    // Richardson-extrapolated central differences on integrator nodes.
    const GridField d1 = (rate(t + h) - rate(t - h)) * (0.5 / h);
    const GridField d2 = (rate(t + 2 * h) - rate(t - 2 * h)) * (0.25 / h);
    const GridField fd = (d1 * 4.0 - d2) * (1.0 / 3.0);
    const GridField exact = second_time_derivative(run, t);
    CHECK(sup_diff(fd, exact) / exact.max_abs() < 1e-5);
  }
}

TEST_CASE("stationarity residual is the sup of log(MA / mu)") {
  std::mt19937_64 rng(37);
  const GridP1 grid(24);
  const Weight w = random_weight(rng, grid, 2);
  const auto s = MeasureSetting::splus(random_density(rng, grid));
  CHECK(stationarity_residual(w, s) == geometry::cl_norm(potential::log_ma_over_mu(w, s), 0));
}

TEST_CASE("horizon and CSV export") {
  const GridP1 grid(16);
  const Weight round = Weight::round(1, grid);
  const auto s = MeasureSetting::s0(GridField(grid, 1.0), 1);
  try {
    flow_solve(round, s, 3.0);
    FAIL("expected OutOfHorizon");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfHorizon);
  }
  const FlowTrajectory traj = flow_solve(round, s, 0.1);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  const std::string text = os.str();
  CHECK(text.rfind("t,sup_psi,stationarity_residual\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(traj.times().size() + 1));
}
