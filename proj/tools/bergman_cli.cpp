// Command line front end for the experiments.
//
// Exit codes: 0 success, 1 usage or config error, 2 property failure,
// 3 numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "bergman/asymptotics.hpp"
#include "bergman/core.hpp"
#include "bergman/error.hpp"
#include "bergman/experiments.hpp"
#include "bergman/krf.hpp"

namespace fs = std::filesystem;
using namespace bergman;
using experiments::ExperimentConfig;

namespace {

constexpr int kUsage = 1;
constexpr int kPropertyFailure = 2;
constexpr int kNumerical = 3;

struct Options {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;
  int cases = 100;
};

ExperimentConfig load(const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : experiments::load_config(opt.config);
  if (opt.seed_given) cfg.seed = opt.seed;
  experiments::validate(cfg);
  return cfg;
}

std::ofstream open_out(const Options& opt, const std::string& name) {
  fs::create_directories(opt.out);
  const fs::path path = fs::path(opt.out) / name;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  std::cerr << "wrote " << path.string() << '\n';
  return out;
}

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

int cmd_iterate(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  auto out = open_out(opt, "iterate.csv");
  out << "k,j,t,sup_psi,sup_step\n";
  for (int k : cfg.k_grid) {
    const auto grid = experiments::iteration_grid(cfg, k);
    const auto run = core::iterate(experiments::initial_weight(cfg, grid), experiments::measure_setting(cfg, grid), k,
                                   experiments::steps_for(k, cfg.t));
    for (std::size_t j = 0; j < run.size(); ++j) {
      const double step = j == 0 ? 0.0 : potential::sup_distance(run[j], run[j - 1]);
      out << k << ',' << j << ',' << fmt("%.17g", static_cast<double>(j) / k) << ','
          << fmt("%.17g", run[j].relative().max_abs()) << ',' << fmt("%.17g", step) << '\n';
    }
  }
  return 0;
}

int cmd_flow(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const auto grid = experiments::flow_grid(cfg);
  const auto traj = krf::flow_solve(experiments::initial_weight(cfg, grid), experiments::measure_setting(cfg, grid),
                                    cfg.t, experiments::flow_control(cfg));
  auto out = open_out(opt, "flow.csv");
  krf::write_trajectory_csv(traj, out);
  const auto& st = traj.stats();
  std::cout << "accepted " << st.accepted << " rejected " << st.rejected << " positivity " << st.positivity_rejections
            << " final residual " << krf::stationarity_residual(krf::dense_output(traj, cfg.t), traj.setting()) << '\n';
  return 0;
}

int cmd_compare(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const auto table = experiments::run_double_scaling(cfg, opt.jobs);
  {
    auto out = open_out(opt, "compare.csv");
    experiments::write_comparison_csv(table, out);
  }
  {
    auto out = open_out(opt, "compare.hex.csv");
    experiments::write_comparison_csv(table, out, true);
  }
  {
    auto out = open_out(opt, "compare.timing.csv");
    experiments::write_timing_csv(table, out);
  }
  experiments::write_comparison_csv(table, std::cout);
  return table.complete() ? 0 : kNumerical;
}

int cmd_expansion(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const auto grid = experiments::flow_grid(cfg);
  const auto report = asymptotics::expansion_residual(experiments::initial_weight(cfg, grid),
                                                      experiments::measure_setting(cfg, grid), cfg.k_grid);
  auto out = open_out(opt, "expansion.csv");
  asymptotics::write_sweep_csv(report.ks, report.residuals, out);
  asymptotics::write_sweep_csv(report.ks, report.residuals, std::cout);
  return 0;
}

int cmd_correction(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const auto grid = experiments::flow_grid(cfg);
  const double t_end = cfg.t + 1.0 / cfg.k_grid.front();
  const auto ctrl = experiments::flow_control(cfg);
  const auto traj =
      krf::flow_solve(experiments::initial_weight(cfg, grid), experiments::measure_setting(cfg, grid), t_end, ctrl);
  const auto eta = asymptotics::solve_eta1(traj, ctrl);
  std::vector<double> plain, corrected;
  for (int k : cfg.k_grid) {
    plain.push_back(asymptotics::claim_residual(traj, nullptr, k, cfg.t));
    corrected.push_back(asymptotics::claim_residual(traj, &eta, k, cfg.t));
  }
  {
    auto out = open_out(opt, "claim_r0.csv");
    asymptotics::write_sweep_csv(cfg.k_grid, plain, out);
  }
  {
    auto out = open_out(opt, "claim_r1.csv");
    asymptotics::write_sweep_csv(cfg.k_grid, corrected, out);
  }
  std::cout << "without correction\n";
  asymptotics::write_sweep_csv(cfg.k_grid, plain, std::cout);
  std::cout << "with eta1\n";
  asymptotics::write_sweep_csv(cfg.k_grid, corrected, std::cout);
  return 0;
}

int cmd_balanced(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  auto out = open_out(opt, "balanced.csv");
  out << "k,iterations,final_residual,converged,warning\n";
  int status = 0;
  for (int k : cfg.k_grid) {
    const auto grid = experiments::iteration_grid(cfg, k);
    core::BalancedOptions bo;
    bo.tol = cfg.balanced_tol;
    bo.max_iter = cfg.balanced_max_iter;
    try {
      const auto res = core::balanced(experiments::measure_setting(cfg, grid), k,
                                      experiments::initial_weight(cfg, grid), bo);
      out << k << ',' << res.residuals.size() << ',' << fmt("%.17g", res.residuals.empty() ? 0.0 : res.residuals.back())
          << ',' << (res.converged ? "yes" : "no") << ',' << res.warning << '\n';
      if (!res.warning.empty()) std::cerr << "k = " << k << ": " << res.warning << '\n';
    } catch (const core::BalancedNoConvergence& e) {
      out << k << ',' << e.residuals().size() << ','
          << fmt("%.17g", e.residuals().empty() ? 0.0 : e.residuals().back()) << ",no," << e.what() << '\n';
      std::cerr << e.what() << '\n';
      status = kNumerical;
    }
  }
  return status;
}

int cmd_properties(const Options& opt) {
  experiments::PropertyCounts counts;
  counts.cases_per_setting = opt.cases;
  const auto results = experiments::run_property_suite(opt.seed_given ? opt.seed : 1, counts);
  auto out = open_out(opt, "properties.txt");
  experiments::write_property_report(results, out);
  experiments::write_property_report(results, std::cout);
  for (const auto& r : results) {
    if (!r.passed()) return kPropertyFailure;
  }
  return 0;
}

int cmd_selftest(const Options& opt) {
  bool ok = true;
  auto check = [&](const std::string& name, bool pass) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
    ok = ok && pass;
  };
  const geometry::GridP1 grid(256);
  const auto round = potential::Weight::round(1, grid);
  const auto s = potential::MeasureSetting::s0(round.ma());
  const auto run = core::iterate(round, s, 8, 4);
  check("reference weight is a fixed point", potential::sup_distance(run.back(), round) < 1e-10);
  const auto traj = krf::flow_solve(round.on(geometry::GridP1(32)), s.on(geometry::GridP1(32)), 0.5);
  check("reference weight is stationary under the flow", krf::dense_output(traj, 0.5).psi().max_abs() < 1e-10);
  experiments::PropertyCounts counts;
  counts.cases_per_setting = 10;
  for (const auto& r : experiments::run_property_suite(opt.seed_given ? opt.seed : 1, counts)) {
    check(r.name, r.passed());
  }
  return ok ? 0 : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman iteration and Kahler-Ricci flow experiments"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "config file (key = value lines)");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { opt.seed = v, opt.seed_given = true; }, "random seed");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Entry entries[] = {
      {"iterate", "run the iteration for every k and write the step history", cmd_iterate},
      {"flow", "solve the flow and write the trajectory", cmd_flow},
      {"compare", "double-scaling comparison of iteration and flow", cmd_compare},
      {"expansion", "Bergman expansion remainder across k", cmd_expansion},
      {"correction", "order-one correction and one-step residuals", cmd_correction},
      {"balanced", "search for balanced weights", cmd_balanced},
      {"properties", "randomized property suite", cmd_properties},
      {"selftest", "quick end-to-end sanity checks", cmd_selftest},
  };
  int (*chosen)(const Options&) = nullptr;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    if (std::string(e.name) == "properties") sub->add_option("--cases", opt.cases, "cases per setting");
    sub->callback([&chosen, fn = e.fn] { chosen = fn; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  try {
    return chosen(opt);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kUsage : kNumerical;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kNumerical;
  }
}
