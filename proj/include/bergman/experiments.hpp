#pragma once

// Configuration-driven experiments: the double-scaling comparison between the
// iteration and the flow, and the randomized property suite.
//
// Config files are plain "key = value" lines; '#' starts a comment. Keys:
//   setting          S0 | S+ | S-
//   degree           d >= 1
//   k_grid           ascending list, e.g. "4, 8, 16, 32"
//   t                target flow time; each k runs m = round(k t) steps
//   l_orders         C^l orders reported besides C^0, e.g. "1, 2"
//   weight.modes     relative potential as "l:c" or "l:m:c" terms
//   weight.random    l_max of a seeded random potential added to weight.modes
//   mu.kind          uniform | modes | ma | calibrated
//   mu.modes         log-density terms for mu.kind = modes
//   tol.quadrature   grid resolution tolerance
//   tol.flow         rtol = atol of the flow integrator
//   horizon          largest flow time allowed
//   flow.n_u         nodes of the flow grid
//   grid.n_u         nodes of the iteration grids (0: max(256, 8 k d))
//   grid.n_long      longitude nodes (0: invariant grids)
//   seed             seed for weight.random
//   balanced.tol, balanced.max_iter

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bergman/core.hpp"
#include "bergman/krf.hpp"

namespace bergman::experiments {

using geometry::GridP1;
using geometry::Mode;
using potential::MeasureSetting;
using potential::SettingKind;
using potential::Weight;

struct ExperimentConfig {
  SettingKind setting = SettingKind::S0;
  int degree = 1;
  std::vector<int> k_grid{4, 8, 16, 32};
  double t = 0.5;
  std::vector<int> l_orders{1, 2};
  std::vector<Mode> weight_modes;
  int weight_random = 0;
  std::string mu_kind = "uniform";
  std::vector<Mode> mu_modes;
  double tol_quadrature = 1e-8;
  double tol_flow = 1e-10;
  double horizon = 2.0;
  int flow_n_u = 64;
  int grid_n_u = 0;
  int grid_n_long = 0;
  std::uint64_t seed = 1;
  double balanced_tol = 1e-10;
  int balanced_max_iter = 500;
};

/// Parses and validates a config. Throws ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
/// Throws ConfigError if the config is inconsistent.
void validate(const ExperimentConfig& cfg);

/// Canonical text of every field (hex floats), the input of config_hash.
std::string canonical_text(const ExperimentConfig& cfg);
/// 64-bit FNV-1a of canonical_text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// m = round(k t), ties to even.
int steps_for(int k, double t);

GridP1 flow_grid(const ExperimentConfig& cfg);
GridP1 iteration_grid(const ExperimentConfig& cfg, int k);
Weight initial_weight(const ExperimentConfig& cfg, const GridP1& grid);
MeasureSetting measure_setting(const ExperimentConfig& cfg, const GridP1& grid);
krf::FlowControl flow_control(const ExperimentConfig& cfg);

struct ComparisonRow {
  int k = 0;
  int m = 0;
  double t_eff = 0.0;
  double sup_err = 0.0;            // C^0 norm of the difference of the Kahler forms
  std::vector<double> cl_err;      // one per l_orders entry
  double potential_err = 0.0;      // sup_distance of the weights
  double dk_to_flow_hilb = 0.0;    // dk_distance(hilb(phi_k^(m)), hilb(phi_{m/k}))
  double runtime = 0.0;            // seconds, reported separately from the table
  std::string status = "ok";       // error code of a failed cell
};

struct ComparisonTable {
  std::vector<int> l_orders;
  std::string config_hash;
  std::vector<ComparisonRow> rows;
  bool complete() const;
};

/// Runs every k cell on up to `jobs` threads. Flow and cell failures are
/// recorded in the row status; the table always has one row per k.
ComparisonTable run_double_scaling(const ExperimentConfig& cfg, int jobs = 1);

/// Columns k,m,t_eff,sup_err,c<l>_err...,potential_err,dk_to_flow_hilb,
/// status,config_hash. With `hex` the reals are printed as hex floats.
void write_comparison_csv(const ComparisonTable& table, std::ostream& out, bool hex = false);
/// Columns k,m,runtime_s.
void write_timing_csv(const ComparisonTable& table, std::ostream& out);

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;
  std::string witness;     // description of the worst failing case
  bool passed() const { return failures == 0; }
};

struct PropertyCounts {
  int cases_per_setting = 100;
  std::vector<int> ks{2, 4, 8, 16};
};

/// Randomized checks of T = Id + F, gauge equivariance, monotonicity, sup
/// contraction, volume and basis independence of the Fubini-Study map.
std::vector<PropertyResult> run_property_suite(std::uint64_t seed, const PropertyCounts& counts = {});

void write_property_report(const std::vector<PropertyResult>& results, std::ostream& out);

}  // namespace bergman::experiments
