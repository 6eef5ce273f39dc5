#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bergman/error.hpp"
#include "bergman/experiments.hpp"

using namespace bergman;
using namespace bergman::experiments;

namespace {

ErrorCode parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

std::string csv(const ComparisonTable& table, bool hex = false) {
  std::ostringstream os;
  write_comparison_csv(table, os, hex);
  return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(
      "# comment line\n"
      "setting = S-\n"
      "degree = 2   # trailing comment\n"
      "k_grid = 4, 8 16\n"
      "t = 0.25\n"
      "l_orders = 1,2,3\n"
      "weight.modes = 1:0.05, 2:0:-0.01\n"
      "weight.random = 3\n"
      "mu.kind = modes\n"
      "mu.modes = 1:0.2\n"
      "tol.quadrature = 1e-9\n"
      "tol.flow = 1e-11\n"
      "horizon = 1.5\n"
      "flow.n_u = 48\n"
      "grid.n_u = 300\n"
      "seed = 77\n");
  CHECK(cfg.setting == SettingKind::Sminus);
  CHECK(cfg.degree == 2);
  CHECK(cfg.k_grid == std::vector<int>{4, 8, 16});
  CHECK(cfg.t == 0.25);
  CHECK(cfg.l_orders == std::vector<int>{1, 2, 3});
  REQUIRE(cfg.weight_modes.size() == 2);
  CHECK(cfg.weight_modes[1].l == 2);
  CHECK(cfg.weight_modes[1].m == 0);
  CHECK(cfg.weight_modes[1].coefficient == -0.01);
  CHECK(cfg.weight_random == 3);
  CHECK(cfg.mu_kind == "modes");
  CHECK(cfg.tol_flow == 1e-11);
  CHECK(cfg.horizon == 1.5);
  CHECK(cfg.flow_n_u == 48);
  CHECK(cfg.grid_n_u == 300);
  CHECK(cfg.seed == 77);
}

TEST_CASE("config errors") {
  CHECK(parse_error("colour = blue\n") == ErrorCode::ConfigError);
  CHECK(parse_error("degree = two\n") == ErrorCode::ConfigError);
  CHECK(parse_error("degree\n") == ErrorCode::ConfigError);
  CHECK(parse_error("k_grid = 8, 4\n") == ErrorCode::ConfigError);
  CHECK(parse_error("t = 3\n") == ErrorCode::ConfigError);
  CHECK(parse_error("mu.kind = calibrated\n") == ErrorCode::ConfigError);
  CHECK(parse_error("weight.modes = 2:1:0.1\n") == ErrorCode::ConfigError);
  CHECK(parse_error("weight.modes = 2\n") == ErrorCode::ConfigError);
  CHECK(parse_error("l_orders = 7\n") == ErrorCode::ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const ExperimentConfig a = parse_config("t = 0.5\n");
  const ExperimentConfig b = parse_config("t = 0.5  # same\n");
  const ExperimentConfig c = parse_config("t = 0.5000000000000001\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("steps round half to even") {
  CHECK(steps_for(4, 0.125) == 0);
  CHECK(steps_for(4, 0.375) == 2);
  CHECK(steps_for(8, 0.5) == 4);
  CHECK(steps_for(3, 0.5) == 2);
  CHECK(steps_for(5, 0.5) == 2);
}

TEST_CASE("stationary configuration has vanishing errors") {
  const ExperimentConfig cfg = parse_config(
      "k_grid = 2, 4, 8\n"
      "t = 0.5\n"
      "mu.kind = ma\n");
  const ComparisonTable table = run_double_scaling(cfg);
  REQUIRE(table.complete());
  for (const auto& row : table.rows) {
    CHECK(row.t_eff == static_cast<double>(row.m) / row.k);
    CHECK(row.sup_err < 1e-9);
    for (double e : row.cl_err) CHECK(e < 1e-9);
    CHECK(row.potential_err < 1e-9);
    CHECK(row.dk_to_flow_hilb < 1e-9);
  }
}

TEST_CASE("generic comparison is deterministic across job counts") {
  const ExperimentConfig cfg = parse_config(
      "k_grid = 4, 8, 16\n"
      "t = 0.5\n"
      "weight.modes = 1:0.05, 2:0.03\n"
      "mu.kind = modes\n"
      "mu.modes = 1:0.1\n");
  const ComparisonTable one = run_double_scaling(cfg, 1);
  const ComparisonTable three = run_double_scaling(cfg, 3);
  CHECK(csv(one) == csv(three));
  CHECK(csv(one, true) == csv(three, true));
  for (std::size_t j = 1; j < one.rows.size(); ++j) CHECK(one.rows[j].sup_err < one.rows[j - 1].sup_err);
  const std::string text = csv(one);
  CHECK(text.rfind("k,m,t_eff,sup_err,c1_err,c2_err,potential_err,dk_to_flow_hilb,status,config_hash\n", 0) == 0);
  CHECK(text.find(config_hash(cfg)) != std::string::npos);
}

TEST_CASE("failed cells keep their row") {
  const ExperimentConfig cfg = parse_config(
      "k_grid = 4, 32\n"
      "grid.n_u = 24\n"
      "weight.modes = 1:0.05\n");
  const ComparisonTable table = run_double_scaling(cfg);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].status == "ok");
  CHECK(table.rows[1].status == "ResolutionTooLow");
  CHECK(std::isnan(table.rows[1].sup_err));
  CHECK_FALSE(table.complete());
}

TEST_CASE("seeded random weights are reproducible") {
  const ExperimentConfig cfg = parse_config("weight.random = 4\nseed = 5\n");
  const GridP1 grid(32);
  CHECK((initial_weight(cfg, grid).psi() - initial_weight(cfg, grid).psi()).max_abs() == 0.0);
  ExperimentConfig other = cfg;
  other.seed = 6;
  CHECK((initial_weight(cfg, grid).psi() - initial_weight(other, grid).psi()).max_abs() > 0.0);
}

TEST_CASE("property suite passes and reports counts") {
  PropertyCounts counts;
  counts.cases_per_setting = 8;
  const auto results = run_property_suite(3, counts);
  REQUIRE(results.size() == 6);
  for (const auto& r : results) {
    CHECK(r.passed());
    CHECK(r.cases == 24);
  }
  std::ostringstream os;
  write_property_report(results, os);
  CHECK(os.str().find("FAIL") == std::string::npos);
}
