#include "bergman/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "bergman/error.hpp"

namespace bergman::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto end = s.find_first_of(", \t", pos);
    const auto item = s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    if (!item.empty()) items.push_back(item);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return items;
}

template <class T>
T parse_number(std::string_view s, const std::string& where) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, where + ": cannot parse '" + std::string(s) + "'");
  }
  return value;
}

std::vector<int> parse_ints(std::string_view s, const std::string& where) {
  std::vector<int> out;
  for (auto item : split_list(s)) out.push_back(parse_number<int>(item, where));
  return out;
}

std::vector<Mode> parse_modes(std::string_view s, const std::string& where) {
  std::vector<Mode> modes;
  for (auto item : split_list(s)) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      const auto colon = item.find(':', pos);
      parts.push_back(item.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
      if (colon == std::string_view::npos) break;
      pos = colon + 1;
    }
    if (parts.size() == 2) {
      modes.push_back({parse_number<int>(parts[0], where), 0, parse_number<double>(parts[1], where)});
    } else if (parts.size() == 3) {
      modes.push_back({parse_number<int>(parts[0], where), parse_number<int>(parts[1], where),
                       parse_number<double>(parts[2], where)});
    } else {
      throw Error(ErrorCode::ConfigError, where + ": mode '" + std::string(item) + "' is not l:c or l:m:c");
    }
  }
  return modes;
}

SettingKind parse_setting(std::string_view s, const std::string& where) {
  if (s == "S0" || s == "s0") return SettingKind::S0;
  if (s == "S+" || s == "Splus" || s == "splus") return SettingKind::Splus;
  if (s == "S-" || s == "Sminus" || s == "sminus") return SettingKind::Sminus;
  throw Error(ErrorCode::ConfigError, where + ": unknown setting '" + std::string(s) + "'");
}

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

std::string modes_text(const std::vector<Mode>& modes) {
  std::string out;
  for (const auto& m : modes) {
    if (!out.empty()) out += ',';
    out += std::to_string(m.l) + ':' + std::to_string(m.m) + ':' + hex(m.coefficient);
  }
  return out;
}

template <class T>
std::string list_text(const std::vector<T>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ',';
    out += std::to_string(x);
  }
  return out;
}

// Coefficients decaying like 1 / (1 + l)^2, rescaled so that |Delta psi| stays
// below budget * d.
std::vector<Mode> random_potential_modes(std::mt19937_64& rng, int degree, int l_max, bool with_longitude,
                                         double budget) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Mode> modes;
  double total = 0.0;
  for (int l = 1; l <= l_max; ++l) {
    const double scale = 1.0 / ((1.0 + l) * (1.0 + l));
    for (int m = with_longitude ? -l : 0; m <= (with_longitude ? l : 0); ++m) {
      modes.push_back({l, m, unit(rng) * scale});
      total += l * (l + 1.0) * std::abs(modes.back().coefficient);
    }
  }
  const double factor = total > 0.0 ? budget * degree / total * (0.6 + 0.4 * unit(rng)) : 0.0;
  for (auto& m : modes) m.coefficient *= factor;
  return modes;
}

std::vector<Mode> random_density_modes(std::mt19937_64& rng, int l_max, bool with_longitude, double amplitude) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Mode> modes;
  for (int l = 0; l <= l_max; ++l) {
    const double scale = amplitude / ((1.0 + l) * (1.0 + l));
    for (int m = with_longitude ? -l : 0; m <= (with_longitude ? l : 0); ++m) {
      modes.push_back({l, m, unit(rng) * scale});
    }
  }
  return modes;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string at = where + " (" + key + ")";
    if (key == "setting") {
      cfg.setting = parse_setting(value, at);
    } else if (key == "degree") {
      cfg.degree = parse_number<int>(value, at);
    } else if (key == "k_grid") {
      cfg.k_grid = parse_ints(value, at);
    } else if (key == "t") {
      cfg.t = parse_number<double>(value, at);
    } else if (key == "l_orders") {
      cfg.l_orders = parse_ints(value, at);
    } else if (key == "weight.modes") {
      cfg.weight_modes = parse_modes(value, at);
    } else if (key == "weight.random") {
      cfg.weight_random = parse_number<int>(value, at);
    } else if (key == "mu.kind") {
      cfg.mu_kind = std::string(value);
    } else if (key == "mu.modes") {
      cfg.mu_modes = parse_modes(value, at);
    } else if (key == "tol.quadrature") {
      cfg.tol_quadrature = parse_number<double>(value, at);
    } else if (key == "tol.flow") {
      cfg.tol_flow = parse_number<double>(value, at);
    } else if (key == "horizon") {
      cfg.horizon = parse_number<double>(value, at);
    } else if (key == "flow.n_u") {
      cfg.flow_n_u = parse_number<int>(value, at);
    } else if (key == "grid.n_u") {
      cfg.grid_n_u = parse_number<int>(value, at);
    } else if (key == "grid.n_long") {
      cfg.grid_n_long = parse_number<int>(value, at);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, at);
    } else if (key == "balanced.tol") {
      cfg.balanced_tol = parse_number<double>(value, at);
    } else if (key == "balanced.max_iter") {
      cfg.balanced_max_iter = parse_number<int>(value, at);
    } else {
      throw Error(ErrorCode::ConfigError, where + ": unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (cfg.degree < 1) fail("degree must be at least 1");
  if (cfg.k_grid.empty()) fail("k_grid is empty");
  for (std::size_t j = 0; j < cfg.k_grid.size(); ++j) {
    if (cfg.k_grid[j] < 1) fail("k_grid entries must be positive");
    if (j > 0 && cfg.k_grid[j] <= cfg.k_grid[j - 1]) fail("k_grid must be strictly ascending");
  }
  if (!(cfg.t >= 0.0) || !std::isfinite(cfg.t)) fail("t must be a finite non-negative number");
  if (!(cfg.horizon > 0.0)) fail("horizon must be positive");
  for (int k : cfg.k_grid) {
    if (static_cast<double>(steps_for(k, cfg.t)) / k > cfg.horizon) {
      fail("m / k exceeds the horizon for k = " + std::to_string(k));
    }
  }
  for (int l : cfg.l_orders) {
    if (l < 1 || l > 4) fail("l_orders entries must lie in 1..4");
  }
  for (const auto& m : cfg.weight_modes) {
    if (m.l < 0 || std::abs(m.m) > m.l) fail("invalid weight mode");
    if (m.m != 0 && cfg.grid_n_long == 0) fail("weight.modes has longitude terms but grid.n_long = 0");
  }
  for (const auto& m : cfg.mu_modes) {
    if (m.l < 0 || std::abs(m.m) > m.l) fail("invalid mu mode");
    if (m.m != 0 && cfg.grid_n_long == 0) fail("mu.modes has longitude terms but grid.n_long = 0");
  }
  if (cfg.weight_random < 0) fail("weight.random must be non-negative");
  if (cfg.mu_kind != "uniform" && cfg.mu_kind != "modes" && cfg.mu_kind != "ma" && cfg.mu_kind != "calibrated") {
    fail("mu.kind must be uniform, modes, ma or calibrated");
  }
  if (cfg.mu_kind == "calibrated" && cfg.setting != SettingKind::Sminus) fail("mu.kind = calibrated needs setting S-");
  if (!(cfg.tol_quadrature > 0.0) || !(cfg.tol_flow > 0.0)) fail("tolerances must be positive");
  if (cfg.flow_n_u < 2) fail("flow.n_u must be at least 2");
  if (cfg.grid_n_u < 0 || cfg.grid_n_long < 0) fail("grid sizes must be non-negative");
  if (!(cfg.balanced_tol > 0.0) || cfg.balanced_max_iter < 1) fail("invalid balanced options");
}

std::string canonical_text(const ExperimentConfig& cfg) {
  std::string out;
  out += "setting=" + std::string(potential::to_string(cfg.setting)) + '\n';
  out += "degree=" + std::to_string(cfg.degree) + '\n';
  out += "k_grid=" + list_text(cfg.k_grid) + '\n';
  out += "t=" + hex(cfg.t) + '\n';
  out += "l_orders=" + list_text(cfg.l_orders) + '\n';
  out += "weight.modes=" + modes_text(cfg.weight_modes) + '\n';
  out += "weight.random=" + std::to_string(cfg.weight_random) + '\n';
  out += "mu.kind=" + cfg.mu_kind + '\n';
  out += "mu.modes=" + modes_text(cfg.mu_modes) + '\n';
  out += "tol.quadrature=" + hex(cfg.tol_quadrature) + '\n';
  out += "tol.flow=" + hex(cfg.tol_flow) + '\n';
  out += "horizon=" + hex(cfg.horizon) + '\n';
  out += "flow.n_u=" + std::to_string(cfg.flow_n_u) + '\n';
  out += "grid.n_u=" + std::to_string(cfg.grid_n_u) + '\n';
  out += "grid.n_long=" + std::to_string(cfg.grid_n_long) + '\n';
  out += "seed=" + std::to_string(cfg.seed) + '\n';
  out += "balanced.tol=" + hex(cfg.balanced_tol) + '\n';
  out += "balanced.max_iter=" + std::to_string(cfg.balanced_max_iter) + '\n';
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int steps_for(int k, double t) { return static_cast<int>(std::nearbyint(k * t)); }

GridP1 flow_grid(const ExperimentConfig& cfg) {
  return GridP1(cfg.flow_n_u, cfg.grid_n_long > 0 ? 2 * cfg.flow_n_u : 0, cfg.tol_quadrature);
}

GridP1 iteration_grid(const ExperimentConfig& cfg, int k) {
  const int n_u = cfg.grid_n_u > 0 ? cfg.grid_n_u : std::max(256, 8 * k * cfg.degree);
  return GridP1(n_u, cfg.grid_n_long, cfg.tol_quadrature);
}

Weight initial_weight(const ExperimentConfig& cfg, const GridP1& grid) {
  std::vector<Mode> modes = cfg.weight_modes;
  if (cfg.weight_random > 0) {
    std::mt19937_64 rng(cfg.seed);
    const auto extra = random_potential_modes(rng, cfg.degree, cfg.weight_random, cfg.grid_n_long > 0, 0.3);
    modes.insert(modes.end(), extra.begin(), extra.end());
  }
  return Weight::from_modes(cfg.degree, grid, modes);
}

MeasureSetting measure_setting(const ExperimentConfig& cfg, const GridP1& grid) {
  if (cfg.mu_kind == "calibrated") return MeasureSetting::sminus_calibrated(grid, cfg.degree);
  geometry::GridField base(grid, static_cast<double>(cfg.degree));
  if (cfg.mu_kind == "modes") {
    base = geometry::exp(geometry::GridField::from_modes(grid, cfg.mu_modes)) * static_cast<double>(cfg.degree);
  } else if (cfg.mu_kind == "ma") {
    base = initial_weight(cfg, grid).ma();
  }
  switch (cfg.setting) {
    case SettingKind::S0: return MeasureSetting::s0(base, cfg.degree);
    case SettingKind::Splus: return MeasureSetting::splus(base);
    case SettingKind::Sminus: return MeasureSetting::sminus(base);
  }
  throw Error(ErrorCode::ConfigError, "unknown setting");
}

krf::FlowControl flow_control(const ExperimentConfig& cfg) {
  krf::FlowControl ctrl;
  ctrl.rtol = cfg.tol_flow;
  ctrl.atol = cfg.tol_flow;
  ctrl.horizon = cfg.horizon;
  return ctrl;
}

bool ComparisonTable::complete() const {
  return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.status == "ok"; });
}

ComparisonTable run_double_scaling(const ExperimentConfig& cfg, int jobs) {
  validate(cfg);
  ComparisonTable table;
  table.l_orders = cfg.l_orders;
  table.config_hash = config_hash(cfg);
  std::vector<double> t_effs;
  for (int k : cfg.k_grid) {
    ComparisonRow row;
    row.k = k;
    row.m = steps_for(k, cfg.t);
    row.t_eff = static_cast<double>(row.m) / k;
    row.cl_err.assign(cfg.l_orders.size(), kNaN);
    t_effs.push_back(row.t_eff);
    table.rows.push_back(std::move(row));
  }
  auto mark_failed = [&](ComparisonRow& row, const std::string& status) {
    row.sup_err = row.potential_err = row.dk_to_flow_hilb = kNaN;
    std::fill(row.cl_err.begin(), row.cl_err.end(), kNaN);
    row.status = status;
  };

  std::optional<krf::FlowTrajectory> traj;
  try {
    const GridP1 grid = flow_grid(cfg);
    krf::FlowControl ctrl = flow_control(cfg);
    ctrl.required_times = t_effs;
    traj.emplace(krf::flow_solve(initial_weight(cfg, grid), measure_setting(cfg, grid),
                                 *std::max_element(t_effs.begin(), t_effs.end()), ctrl));
  } catch (const Error& e) {
    for (auto& row : table.rows) mark_failed(row, "flow:" + std::string(to_string(e.code())));
    return table;
  }

  auto run_cell = [&](ComparisonRow& row) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const GridP1 grid = iteration_grid(cfg, row.k);
      const MeasureSetting s = measure_setting(cfg, grid);
      const core::IterationRun run = core::iterate_with_forms(initial_weight(cfg, grid), s, row.k, row.m);
      const Weight& iterate = run.weights.back();
      const Weight flow(cfg.degree, geometry::resample(krf::dense_output(*traj, row.t_eff).psi(), grid));
      const geometry::GridField omega_diff = iterate.ma() - flow.ma();
      const double noise = cfg.degree;
      row.sup_err = geometry::cl_norm(omega_diff, 0, noise);
      for (std::size_t j = 0; j < cfg.l_orders.size(); ++j) {
        row.cl_err[j] = geometry::cl_norm(omega_diff, cfg.l_orders[j], noise);
      }
      row.potential_err = potential::sup_distance(iterate, flow);
      row.dk_to_flow_hilb = core::dk_distance(run.forms.back(), core::hilb(flow, s, row.k));
    } catch (const Error& e) {
      mark_failed(row, std::string(to_string(e.code())));
    }
    row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const int workers = std::clamp(jobs, 1, static_cast<int>(table.rows.size()));
  if (workers == 1) {
    for (auto& row : table.rows) run_cell(row);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < table.rows.size(); j = next++) run_cell(table.rows[j]);
    });
  }
  for (auto& th : pool) th.join();
  return table;
}

void write_comparison_csv(const ComparisonTable& table, std::ostream& out, bool hex_floats) {
  out << "k,m,t_eff,sup_err";
  for (int l : table.l_orders) out << ",c" << l << "_err";
  out << ",potential_err,dk_to_flow_hilb,status,config_hash\n";
  char buf[64];
  auto real = [&](double x) {
    std::snprintf(buf, sizeof buf, hex_floats ? "%a" : "%.17g", x);
    return std::string(buf);
  };
  for (const auto& row : table.rows) {
    out << row.k << ',' << row.m << ',' << real(row.t_eff) << ',' << real(row.sup_err);
    for (double c : row.cl_err) out << ',' << real(c);
    out << ',' << real(row.potential_err) << ',' << real(row.dk_to_flow_hilb) << ',' << row.status << ','
        << table.config_hash << '\n';
  }
}

void write_timing_csv(const ComparisonTable& table, std::ostream& out) {
  out << "k,m,runtime_s\n";
  char buf[64];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", row.runtime);
    out << row.k << ',' << row.m << ',' << buf << '\n';
  }
}

std::vector<PropertyResult> run_property_suite(std::uint64_t seed, const PropertyCounts& counts) {
  std::vector<PropertyResult> results{
      {"identity T = Id + F", 0, 0, 0.0, 1e-12, {}},
      {"gauge equivariance of F", 0, 0, 0.0, 0.0, {}},
      {"monotonicity of T", 0, 0, 0.0, 1e-10, {}},
      {"sup contraction of T", 0, 0, 0.0, 1e-9, {}},
      {"volume of T(phi)", 0, 0, 0.0, 1e-10, {}},
      {"basis independence of FS", 0, 0, 0.0, 1e-10, {}},
  };
  const std::vector<SettingKind> kinds{SettingKind::S0, SettingKind::Splus, SettingKind::Sminus};
  for (std::size_t which = 0; which < kinds.size(); ++which) {
    for (int c = 0; c < counts.cases_per_setting; ++c) {
      std::seed_seq seq{seed, static_cast<std::uint64_t>(which), static_cast<std::uint64_t>(c)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const int k = counts.ks[static_cast<std::size_t>(c) % counts.ks.size()];
      const bool general = c % 5 == 4;
      const int d = general ? 1 : 1 + (c / static_cast<int>(counts.ks.size())) % 2;
      const GridP1 grid = general ? GridP1(std::max(40, 2 * k * d + 2), 2 * std::max(40, 2 * k * d + 2))
                                  : GridP1::for_level(k, d);
      const auto modes_a = random_potential_modes(rng, d, 4, general, 0.5);
      const auto modes_b = random_potential_modes(rng, d, 4, general, 0.5);
      const auto modes_mu = random_density_modes(rng, 3, general, 0.3);
      const double gauge_a = unit(rng), gauge_b = unit(rng), shift = unit(rng);
      const double bump_a = 0.05 * (1.0 + unit(rng)), bump_b = 0.05 * (1.0 + unit(rng));

      const geometry::GridField base = geometry::exp(geometry::GridField::from_modes(grid, modes_mu));
      const MeasureSetting s = kinds[which] == SettingKind::S0      ? MeasureSetting::s0(base, d)
                               : kinds[which] == SettingKind::Splus ? MeasureSetting::splus(base)
                                                                    : MeasureSetting::sminus(base);
      const Weight a = Weight::from_modes(d, grid, modes_a, gauge_a);
      const Weight b = Weight::from_modes(d, grid, modes_b, gauge_b);

      const std::string witness = "setting=" + std::string(potential::to_string(kinds[which])) +
                                  " k=" + std::to_string(k) + " d=" + std::to_string(d) + " grid=" +
                                  std::to_string(grid.n_u()) + "x" + std::to_string(grid.n_long()) +
                                  " seed=" + std::to_string(seed) + " case=" + std::to_string(c) +
                                  " a=[" + modes_text(modes_a) + "] gauge_a=" + hex(gauge_a) + " b=[" +
                                  modes_text(modes_b) + "] gauge_b=" + hex(gauge_b) + " mu=[" +
                                  modes_text(modes_mu) + "]";
      auto record = [&](PropertyResult& r, double violation) {
        ++r.cases;
        if (!(violation <= r.tolerance)) {
          if (r.failures == 0 || !(violation <= r.worst)) r.witness = witness;
          ++r.failures;
        }
        if (!(violation <= r.worst)) r.worst = violation;
      };

      try {
        const Weight ta = core::iterate_once(a, s, k);
        const Weight tb = core::iterate_once(b, s, k);
        const core::Increment fa = core::f_functional(a, s, k);
        record(results[0], (ta.relative() - a.relative() - fa.total()).max_abs());

        const Weight a0(d, a.psi());
        const core::Increment f0 = core::f_functional(a0, s, k);
        const core::Increment fc = core::f_functional(a0.shifted(shift), s, k);
        const double expected = -s.sign() * shift / k;
        record(results[1], std::max((fc.field - f0.field).max_abs(), std::abs((fc.gauge - f0.gauge) - expected)));

        const geometry::GridField bump = geometry::GridField::from_function(
            grid, [&](double u, double) { return bump_a * (1.0 + u) * (1.0 + u) / 4.0 + bump_b; });
        const Weight above(d, a.psi() + bump, a.gauge());
        record(results[2], (ta.relative() - core::iterate_once(above, s, k).relative()).max());

        const double factor = 1.0 - s.sign() / static_cast<double>(k);
        record(results[3], potential::sup_distance(ta, tb) - factor * potential::sup_distance(a, b));

        record(results[4], std::abs(geometry::integrate(ta.ma()) - d));

        const core::HermitianForm h = core::hilb(a, s, k);
        Eigen::MatrixXcd z(h.dim(), h.dim());
        for (int i = 0; i < h.dim(); ++i) {
          for (int j = 0; j < h.dim(); ++j) z(i, j) = {unit(rng), unit(rng)};
        }
        const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
        const Eigen::MatrixXcd u = qr.householderQ() * Eigen::MatrixXcd::Identity(h.dim(), h.dim());
        const Eigen::MatrixXcd basis = core::orthonormal_basis(h) * u;
        record(results[5], potential::sup_distance(core::fs(h, grid), core::fs_with_basis(h, basis, grid)));
      } catch (const Error& e) {
        for (auto& r : results) {
          if (r.cases < static_cast<int>(which) * counts.cases_per_setting + c + 1) {
            ++r.cases;
            ++r.failures;
            r.worst = std::numeric_limits<double>::infinity();
            r.witness = witness + " error=" + e.what();
          }
        }
      }
    }
  }
  return results;
}

void write_property_report(const std::vector<PropertyResult>& results, std::ostream& out) {
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%s %s: cases=%d failures=%d worst=%.3e tol=%.1e\n", r.passed() ? "PASS" : "FAIL",
                  r.name.c_str(), r.cases, r.failures, r.worst, r.tolerance);
    out << buf;
    if (!r.passed()) out << "  witness: " << r.witness << '\n';
  }
}

}  // namespace bergman::experiments
