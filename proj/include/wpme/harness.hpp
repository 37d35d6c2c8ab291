#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "wpme/errors.hpp"
#include "wpme/grid.hpp"
#include "wpme/model.hpp"
#include "wpme/norms.hpp"
#include "wpme/profiles.hpp"
#include "wpme/solver.hpp"

namespace wpme {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Work pool and seeding
// ---------------------------------------------------------------------------

/// Runs body(0..count-1) on at most `threads` workers. Exceptions are
/// collected and the one with the smallest index is rethrown.
template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// splitmix64 of the seed mixed with an FNV-1a hash of `tag`, so each
/// experiment draws from its own stream regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct GridSpec {
  double r_max = 50.0;
  int cells = 400;
  /// "graded": y_i = R (i/M)^power; "geometric": widths growing by `stretch`.
  std::string spacing = "graded";
  double power = 2.0;
  double stretch = 1.0;

  GridPtr build(const ProblemParams& p) const {
    if (spacing == "graded") return make_graded_grid(p, r_max, cells, power);
    if (spacing == "geometric") return make_grid(p, r_max, cells, stretch);
    throw ConfigError("unknown grid spacing '" + spacing + "'");
  }
  /// Same mesh family with `factor` times as many cells.
  GridSpec refined(int factor) const {
    GridSpec g = *this;
    g.cells = cells * factor;
    g.stretch = std::pow(stretch, 1.0 / factor);
    return g;
  }
};

struct DatumSpec {
  /// explicit | profile | compact | power | constant | csv
  std::string kind = "explicit";
  double a = 1.0;
  double b = 1.0 / 6.0;
  double beta = 1.0;
  double T = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 0.25;
  double scale = 1.0;
  /// Exponent of the power datum scale * y^s; negative selects the critical rate.
  double s = -1.0;
  std::string file;
  /// Truncation level n > 0 applies tau_n (and chi_{B_n} for zero_extension).
  double n = 0.0;
  std::string preparation = "zero_extension";
};

struct NormSpec {
  double r = 1.0;
  double p = 1.0;
  /// <= 0 selects omega/2 + 1.
  double alpha = 0.0;
};

struct ExperimentConfig {
  std::string name;
  ProblemParams problem{3, 2.0, WeightSpec::pure_power(1.0)};
  GridSpec grid;
  DatumSpec datum;
  SolverOptions solver;
  double t_end = 0.5;
  /// zero_flux | separable | barrier | explicit
  std::string bc = "zero_flux";
  NormSpec norms;
  std::string out_dir;
  /// Experiment-specific keys of the [experiment] section.
  std::map<std::string, std::string> extra;

  double num(const std::string& key, double def) const {
    auto it = extra.find(key);
    if (it == extra.end()) return def;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("experiment." + key + ": not a number: '" + it->second + "'");
    }
  }
  int integer(const std::string& key, int def) const {
    const double v = num(key, def);
    if (v != std::floor(v)) throw ConfigError("experiment." + key + ": expected an integer");
    return static_cast<int>(v);
  }
  std::vector<double> list(const std::string& key, std::vector<double> def) const {
    auto it = extra.find(key);
    if (it == extra.end()) return def;
    std::vector<double> out;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("experiment." + key + ": bad list entry '" + tok + "'");
      }
    }
    if (out.empty()) throw ConfigError("experiment." + key + ": empty list");
    return out;
  }
};

namespace detail {

inline WeightSpec read_weight_table(const std::string& path, double gamma, double k, double K) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open weight table " + path);
  std::string line;
  std::getline(is, line);
  std::vector<double> r, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (!(ls >> a >> b)) throw ConfigError("malformed row in " + path + ": " + line);
    r.push_back(a);
    v.push_back(b);
  }
  return WeightSpec::user_radial(gamma, k, K, std::move(r), std::move(v));
}

inline const std::map<std::string, std::vector<std::string>>& config_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"problem", {"N", "m", "gamma", "weight", "eps", "k", "K", "table"}},
      {"grid", {"R_max", "cells", "spacing", "power", "stretch"}},
      {"datum",
       {"kind", "a", "b", "beta", "T", "c1", "c2", "c3", "scale", "s", "file", "n", "preparation"}},
      {"solver",
       {"t_end", "bc", "dt_init", "dt_max", "dt_min", "fixed_dt", "newton_tol", "newton_max_iters",
        "blowup_factor", "blowup_window", "output_count", "change_target"}},
      {"norms", {"r", "p", "alpha"}},
      {"output", {"dir"}},
  };
  return keys;
}

}  // namespace detail

/// Overlays an INI tree onto `cfg`. Unknown sections or keys are errors,
/// except inside [experiment], which is passed through verbatim.
inline ExperimentConfig apply_config(const boost::property_tree::ptree& pt, ExperimentConfig cfg) {
  namespace pt_ = boost::property_tree;
  for (const auto& [section, body] : pt) {
    if (section == "experiment") {
      for (const auto& [key, val] : body) cfg.extra[key] = val.data();
      continue;
    }
    auto it = detail::config_keys().find(section);
    if (it == detail::config_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, val] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
  // get(path, default) would silently fall back on unparsable values
  auto get = [&](const std::string& path, auto def) {
    const auto child = pt.get_child_optional(path);
    if (!child) return def;
    try {
      return child->template get_value<decltype(def)>();
    } catch (const pt_::ptree_error&) {
      throw ConfigError("bad value for " + path + ": '" + child->data() + "'");
    }
  };

  if (pt.get_child_optional("experiment.name")) cfg.name = pt.get<std::string>("experiment.name");

  const int N = get("problem.N", cfg.problem.N());
  const double m = get("problem.m", cfg.problem.m());
  const double gamma = get("problem.gamma", cfg.problem.gamma());
  const WeightSpec& w0 = cfg.problem.weight();
  const std::string kind = get("problem.weight", to_string(w0.kind()));
  const double eps = get("problem.eps", w0.eps());
  const double k = get("problem.k", w0.k());
  const double K = get("problem.K", w0.K());
  WeightSpec weight = w0;
  if (pt.get_child_optional("problem")) {
    if (kind == "pure_power") {
      weight = WeightSpec::pure_power(gamma);
    } else if (kind == "regularized_power") {
      weight = WeightSpec::regularized_power(gamma, eps, k, K);
    } else if (kind == "user_radial") {
      const std::string table = get("problem.table", std::string());
      if (table.empty()) throw ConfigError("user_radial weight needs problem.table");
      weight = detail::read_weight_table(table, gamma, k, K);
    } else {
      throw ConfigError("unknown weight kind '" + kind + "'");
    }
  }
  cfg.problem = ProblemParams(N, m, weight, cfg.problem.horizon());

  cfg.grid.r_max = get("grid.R_max", cfg.grid.r_max);
  cfg.grid.cells = get("grid.cells", cfg.grid.cells);
  cfg.grid.spacing = get("grid.spacing", cfg.grid.spacing);
  cfg.grid.power = get("grid.power", cfg.grid.power);
  cfg.grid.stretch = get("grid.stretch", cfg.grid.stretch);

  DatumSpec& d = cfg.datum;
  d.kind = get("datum.kind", d.kind);
  d.a = get("datum.a", d.a);
  d.b = get("datum.b", d.b);
  d.beta = get("datum.beta", d.beta);
  d.T = get("datum.T", d.T);
  d.c1 = get("datum.c1", d.c1);
  d.c2 = get("datum.c2", d.c2);
  d.c3 = get("datum.c3", d.c3);
  d.scale = get("datum.scale", d.scale);
  d.s = get("datum.s", d.s);
  d.file = get("datum.file", d.file);
  d.n = get("datum.n", d.n);
  d.preparation = get("datum.preparation", d.preparation);
  if (!d.file.empty() && !std::filesystem::exists(d.file)) {
    throw ConfigError("datum file does not exist: " + d.file);
  }

  SolverOptions& o = cfg.solver;
  cfg.t_end = get("solver.t_end", cfg.t_end);
  cfg.bc = get("solver.bc", cfg.bc);
  o.dt_init = get("solver.dt_init", o.dt_init);
  o.dt_max = get("solver.dt_max", o.dt_max);
  o.dt_min = get("solver.dt_min", o.dt_min);
  o.controller.fixed_dt = get("solver.fixed_dt", o.controller.fixed_dt);
  o.controller.change_target = get("solver.change_target", o.controller.change_target);
  o.newton_tol = get("solver.newton_tol", o.newton_tol);
  o.newton_max_iters = get("solver.newton_max_iters", o.newton_max_iters);
  o.blowup_factor = get("solver.blowup_factor", o.blowup_factor);
  o.blowup_window = get("solver.blowup_window", o.blowup_window);
  o.output_count = get("solver.output_count", o.output_count);

  cfg.norms.r = get("norms.r", cfg.norms.r);
  cfg.norms.p = get("norms.p", cfg.norms.p);
  cfg.norms.alpha = get("norms.alpha", cfg.norms.alpha);
  cfg.out_dir = get("output.dir", cfg.out_dir);

  if (!(cfg.t_end > 0.0)) throw ConfigError("solver.t_end must be positive");
  if (!(cfg.norms.r >= 1.0)) throw ConfigError("norms.r must be >= 1");
  if (!(cfg.norms.p >= 1.0)) throw ConfigError("norms.p must be >= 1");
  if (cfg.norms.alpha > 0.0 && !alpha_admissible(cfg.problem, cfg.norms.alpha)) {
    throw ConfigError("norms.alpha must exceed omega/2 = " +
                      std::to_string(0.5 * growth_omega(cfg.problem)));
  }
  cfg.solver.norm_r = cfg.norms.r;
  cfg.solver.alpha = cfg.norms.alpha;
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return apply_config(pt, std::move(base));
}

inline json to_json(const ExperimentConfig& c) {
  const WeightSpec& w = c.problem.weight();
  json j;
  j["experiment"] = c.name;
  j["problem"] = {{"N", c.problem.N()}, {"m", c.problem.m()}, {"gamma", c.problem.gamma()},
                  {"weight", to_string(w.kind())}, {"eps", w.eps()}, {"k", w.k()}, {"K", w.K()}};
  j["grid"] = {{"R_max", c.grid.r_max}, {"cells", c.grid.cells}, {"spacing", c.grid.spacing},
               {"power", c.grid.power}, {"stretch", c.grid.stretch}};
  const DatumSpec& d = c.datum;
  j["datum"] = {{"kind", d.kind}, {"a", d.a}, {"b", d.b}, {"beta", d.beta}, {"T", d.T},
                {"c1", d.c1}, {"c2", d.c2}, {"c3", d.c3}, {"scale", d.scale}, {"s", d.s},
                {"file", d.file}, {"n", d.n}, {"preparation", d.preparation}};
  j["solver"] = {{"t_end", c.t_end}, {"bc", c.bc}, {"dt_init", c.solver.dt_init},
                 {"dt_max", c.solver.dt_max}, {"fixed_dt", c.solver.controller.fixed_dt},
                 {"newton_tol", c.solver.newton_tol}, {"blowup_factor", c.solver.blowup_factor},
                 {"output_count", c.solver.output_count}};
  j["norms"] = {{"r", c.norms.r}, {"p", c.norms.p}, {"alpha", c.norms.alpha}};
  j["experiment_keys"] = c.extra;
  return j;
}

// ---------------------------------------------------------------------------
// Data and boundary conditions from a config
// ---------------------------------------------------------------------------

struct PreparedDatum {
  GridFunction u0;
  std::optional<EllipticProfile> profile;
  std::optional<ExplicitFamily> family;
};

inline PreparedDatum build_datum(const DatumSpec& d, const ProblemParams& p, GridPtr grid) {
  PreparedDatum out;
  if (d.kind == "explicit") {
    out.family.emplace(p, d.a, d.b);
    out.u0 = out.family->sample(grid, 0.0);
  } else if (d.kind == "profile") {
    out.profile = shoot_profile(p, d.beta, d.T, grid);
    out.u0 = out.profile->W();
  } else if (d.kind == "compact") {
    out.u0 = compact_profile(grid, p, d.c1, d.c2, d.c3);
  } else if (d.kind == "power") {
    const double s = d.s < 0.0 ? p.critical_rate() : d.s;
    out.u0 = GridFunction::sample(grid, [&](double y) { return d.scale * std::pow(y, s); });
  } else if (d.kind == "constant") {
    out.u0 = GridFunction::sample(grid, [&](double) { return d.scale; });
  } else if (d.kind == "csv") {
    if (d.file.empty()) throw ConfigError("csv datum needs datum.file");
    out.u0 = read_csv(d.file, grid);
  } else {
    throw ConfigError("unknown datum kind '" + d.kind + "'");
  }
  if (d.n > 0.0) {
    DatumPreparation prep;
    if (d.preparation == "zero_extension") {
      prep = DatumPreparation::zero_extension;
    } else if (d.preparation == "clamp_only") {
      prep = DatumPreparation::clamp_only;
    } else {
      throw ConfigError("unknown datum preparation '" + d.preparation + "'");
    }
    out.u0 = prepare_datum(out.u0, d.n, prep);
  }
  return out;
}

inline BoundaryCondition build_bc(const std::string& kind, const PreparedDatum& d,
                                  const ProblemParams& p, double r) {
  if (kind == "zero_flux") return BoundaryCondition::zero_flux();
  if (kind == "separable") {
    if (!d.profile) throw ConfigError("separable boundary data needs a profile datum");
    return BoundaryCondition::separable(*d.profile);
  }
  if (kind == "explicit") {
    if (!d.family) throw ConfigError("explicit boundary data needs an explicit datum");
    return BoundaryCondition::from_family(*d.family);
  }
  if (kind == "barrier") return BoundaryCondition::from_barrier(calibrate_barrier(d.u0, p, r));
  throw ConfigError("unknown boundary condition '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Assertion {
  std::string name;
  /// Mathematical property the check stands for.
  std::string property;
  double measured = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool pass = false;
};

namespace detail {
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace detail

struct ExperimentReport {
  std::string experiment;
  json inputs = json::object();
  json measured = json::object();
  std::vector<Assertion> assertions;
  std::vector<std::string> artifacts;

  /// Records measured in [lower, upper]; NaN fails.
  const Assertion& check(std::string name, std::string property, double value,
                         double lower = -std::numeric_limits<double>::infinity(),
                         double upper = std::numeric_limits<double>::infinity()) {
    Assertion a;
    a.name = std::move(name);
    a.property = std::move(property);
    a.measured = value;
    a.lower = lower;
    a.upper = upper;
    a.pass = !std::isnan(value) && value >= lower && value <= upper;
    assertions.push_back(std::move(a));
    return assertions.back();
  }

  bool passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
  }

  const Assertion& get(const std::string& name) const {
    for (const auto& a : assertions) {
      if (a.name == name) return a;
    }
    throw std::out_of_range("no assertion named " + name);
  }

  json to_json() const {
    json j;
    j["experiment"] = experiment;
    j["inputs"] = inputs;
    j["measured"] = measured;
    j["assertions"] = json::array();
    for (const auto& a : assertions) {
      j["assertions"].push_back({{"name", a.name},
                                 {"property", a.property},
                                 {"measured", detail::number(a.measured)},
                                 {"tolerance", {{"lower", detail::number(a.lower)},
                                                {"upper", detail::number(a.upper)}}},
                                 {"pass", a.pass}});
    }
    j["artifacts"] = artifacts;
    j["pass"] = passed();
    return j;
  }
};

struct RunContext {
  std::uint64_t seed = 20240611;
  int threads = 1;
  /// Empty disables artifact files.
  std::filesystem::path out_dir;
};

/// --out beats WPME_OUT_DIR beats [output] dir beats "wpme_out".
inline std::filesystem::path resolve_out_dir(const std::string& cli, const std::string& config) {
  if (!cli.empty()) return cli;
  if (const char* env = std::getenv("WPME_OUT_DIR"); env && *env) return env;
  if (!config.empty()) return config;
  return "wpme_out";
}

namespace detail {

inline std::filesystem::path artifact_dir(const RunContext& ctx, const std::string& name) {
  auto dir = ctx.out_dir / name;
  std::filesystem::create_directories(dir);
  return dir;
}

/// Least-squares slope of log y against log x.
inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("log_slope needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double max_rel_error(const GridFunction& u, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ex = exact(u.radius(i));
    e = std::max(e, std::abs(u[i] - ex) / std::abs(ex));
  }
  return e;
}

inline double signed_mass(const GridFunction& u) {
  double s = 0.0;
  const auto& mass = u.grid->cv_mass();
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * mass[i];
  return s;
}

/// Sum of up to three smooth compact bumps (1 - ((y-c)/w)^2)_+^2 with random
/// centre, width and amplitude in [lo, hi].
inline GridFunction random_bumps(const GridPtr& grid, std::mt19937_64& rng, double lo, double hi,
                                 double centre_max) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> amp(lo, hi);
  std::uniform_real_distribution<double> centre(0.0, centre_max);
  std::uniform_real_distribution<double> width(0.5, 3.0);
  const int k = count(rng);
  std::vector<double> A(k), C(k), W(k);
  for (int i = 0; i < k; ++i) {
    A[i] = amp(rng);
    C[i] = centre(rng);
    W[i] = width(rng);
  }
  return GridFunction::sample(grid, [&](double y) {
    double v = 0.0;
    for (int i = 0; i < k; ++i) {
      const double z = (y - C[i]) / W[i];
      if (std::abs(z) < 1.0) v += A[i] * (1.0 - z * z) * (1.0 - z * z);
    }
    return v;
  });
}

inline void write_rows(const std::filesystem::path& path, const std::string& header,
                       const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << header << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Closed-form reproduction: Dirichlet data from the explicit family, max
/// relative error at t_end and observed orders under h and dt refinement.
inline ExperimentReport exp_explicit_convergence(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "explicit_convergence";
  rep.inputs = to_json(cfg);
  const ProblemParams& P = cfg.problem;
  const ExplicitFamily fam(P, cfg.datum.a, cfg.datum.b);
  if (!(cfg.t_end < fam.T())) throw ConfigError("t_end must precede the blow-up time of the family");

  struct Run {
    std::string kind;
    int cells;
    double dt;
    double error = 0.0;
    GridFunction final_state;
  };
  std::vector<Run> runs{{"main", cfg.grid.cells, cfg.solver.dt_init}};
  const double dt_space = cfg.num("space_dt", 1e-5);
  for (double M : cfg.list("space_cells", {50, 100, 200})) runs.push_back({"space", static_cast<int>(M), dt_space});
  const int M_time = cfg.integer("time_cells", 800);
  for (double dt : cfg.list("time_steps", {0.04, 0.02, 0.01, 0.005})) runs.push_back({"time", M_time, dt});

  parallel_for(runs.size(), ctx.threads, [&](std::size_t k) {
    Run& r = runs[k];
    GridSpec gs = cfg.grid;
    gs.cells = r.cells;
    const GridPtr g = gs.build(P);
    SolverOptions o = cfg.solver;
    o.controller.fixed_dt = true;
    o.dt_init = r.dt;
    o.bc = BoundaryCondition::from_family(fam);
    o.output_times = {cfg.t_end};
    o.keep_snapshots = false;
    const Trajectory tr = solve(P, fam.sample(g, 0.0), cfg.t_end, o);
    r.error = detail::max_rel_error(tr.final_state, [&](double y) { return fam.value(y, cfg.t_end); });
    r.final_state = tr.final_state;
  });

  std::vector<double> hs, es, dts, et;
  json table = json::array();
  for (const auto& r : runs) {
    table.push_back({{"kind", r.kind}, {"cells", r.cells}, {"dt", r.dt}, {"max_relative_error", r.error}});
    if (r.kind == "space") {
      hs.push_back(cfg.grid.r_max / r.cells);
      es.push_back(r.error);
    } else if (r.kind == "time") {
      dts.push_back(r.dt);
      et.push_back(r.error);
    }
  }
  const double space_order = detail::log_slope(hs, es);
  const double time_order = detail::log_slope(dts, et);
  rep.measured["T"] = fam.T();
  rep.measured["kappa"] = fam.kappa();
  rep.measured["runs"] = table;
  rep.measured["space_order"] = space_order;
  rep.measured["time_order"] = time_order;

  rep.check("max_relative_error", "numerical solution reproduces the explicit blow-up family",
            runs[0].error, 0.0, cfg.num("error_tol", 0.02));
  rep.check("space_order", "second-order convergence under mesh refinement", space_order,
            cfg.num("space_order_lo", 1.7), cfg.num("space_order_hi", 2.3));
  rep.check("time_order", "first-order convergence of implicit Euler", time_order,
            cfg.num("time_order_lo", 0.8), cfg.num("time_order_hi", 1.2));

  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, rep.experiment);
    std::vector<std::vector<double>> rows;
    for (const auto& r : runs) rows.push_back({r.kind == "main" ? 0.0 : r.kind == "space" ? 1.0 : 2.0,
                                               static_cast<double>(r.cells), r.dt, r.error});
    detail::write_rows(dir / "convergence.csv", "kind,cells,dt,max_relative_error", rows);
    rows.clear();
    const GridFunction& u = runs[0].final_state;
    for (std::size_t i = 0; i < u.size(); ++i) rows.push_back({u.radius(i), u[i], fam.value(u.radius(i), cfg.t_end)});
    detail::write_rows(dir / "final_state.csv", "radius,numerical,exact", rows);
    rep.artifacts = {(dir / "convergence.csv").string(), (dir / "final_state.csv").string()};
  }
  return rep;
}

/// Elliptic profiles W_beta: integral-equation residual, small-y expansion,
/// far-field growth rate and ordering in beta.
inline ExperimentReport exp_profile_shooting(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "profile_shooting";
  rep.inputs = to_json(cfg);
  const ProblemParams& P = cfg.problem;
  const double m = P.m();
  const double g = P.gamma();
  const double T = cfg.datum.T;
  const double beta = cfg.datum.beta;
  std::vector<double> betas = cfg.list("betas", {0.5, 1.0, 2.0, 4.0});
  if (std::find(betas.begin(), betas.end(), beta) == betas.end()) betas.push_back(beta);
  std::sort(betas.begin(), betas.end());

  const GridPtr grid = cfg.grid.build(P);
  const PicardKernel kernel(grid, m, T);
  std::vector<EllipticProfile> profs(betas.size());
  parallel_for(betas.size(), ctx.threads, [&](std::size_t k) { profs[k] = shoot_profile(kernel, betas[k]); });
  const EllipticProfile& main =
      profs[std::find(betas.begin(), betas.end(), beta) - betas.begin()];

  const std::vector<double> window = cfg.list("slope_window", {100.0, 1000.0});
  if (window.size() != 2) throw ConfigError("experiment.slope_window needs two radii");
  const double target = (2.0 - g) * m / (m - 1.0);
  const double slope = loglog_slope(main.V, window[0], window[1]);

  json table = json::array();
  for (const auto& pr : profs) {
    json row{{"beta", pr.beta}, {"picard_iters", pr.picard_iters}, {"residual", pr.residual},
             {"asymptotic_slope", pr.asymptotic_slope},
             {"window_slope", loglog_slope(pr.V, window[0], window[1])},
             {"defect", profile_defect(pr)}};
    if (grid->r_max() >= 10.0 * window[1]) row["next_decade_slope"] = loglog_slope(pr.V, window[1], 10.0 * window[1]);
    table.push_back(row);
  }
  rep.measured["profiles"] = table;
  rep.measured["target_slope"] = target;

  rep.check("picard_residual", "fixed point of the radial integral equation", main.residual, 0.0,
            cfg.num("residual_tol", 1e-8));

  if (P.weight().is_exact_power()) {
    const double coef = beta / (T * (m - 1.0) * (2.0 - g) * (P.N() - g));
    const double ymax = cfg.num("small_y", 1e-2);
    double worst = 0.0;
    for (std::size_t i = 1; i < main.V.size() && main.V.radius(i) <= ymax; ++i) {
      const double y = main.V.radius(i);
      const double pred = coef * std::pow(y, 2.0 - g);
      worst = std::max(worst, std::abs((main.V[i] - std::pow(beta, m)) / pred - 1.0));
    }
    rep.measured["small_y_coefficient"] = coef;
    rep.check("small_y_expansion", "V = beta^m + c y^{2-gamma} + o(y^{2-gamma}) near the origin", worst,
              0.0, cfg.num("small_y_tol", 0.01));
  }

  rep.check("far_field_slope", "d log V / d log y tends to (2-gamma)m/(m-1)",
            std::abs(slope / target - 1.0), 0.0, cfg.num("slope_tol", 0.02));
  rep.measured["window_slope"] = slope;

  int violations = 0;
  for (std::size_t k = 0; k + 1 < profs.size(); ++k) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      if (!(profs[k].V[i] < profs[k + 1].V[i])) ++violations;
    }
  }
  rep.check("beta_ordering", "beta1 < beta2 implies W_beta1 < W_beta2 pointwise", violations, 0, 0);

  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, rep.experiment);
    for (const auto& pr : profs) {
      std::ostringstream name;
      name << "profile_beta_" << pr.beta << ".csv";
      write_profile_csv((dir / name.str()).string(), pr);
      rep.artifacts.push_back((dir / name.str()).string());
    }
  }
  return rep;
}

namespace detail {

struct BlowupRun {
  Trajectory traj;
  std::optional<BlowupFit> center_fit;
};

inline BlowupRun run_to_blowup(const ProblemParams& P, const GridFunction& u0, const BoundaryCondition& bc,
                               const SolverOptions& base, double T, std::vector<double> outputs = {}) {
  SolverOptions o = base;
  o.bc = bc;
  o.output_times = std::move(outputs);
  o.keep_snapshots = !o.output_times.empty();
  if (o.output_times.empty()) o.output_count = 2;
  BlowupRun r;
  r.traj = solve(P, u0, 2.0 * T, o);
  r.center_fit = detect_blowup(r.traj.step_times, r.traj.step_center, P.m(), 0.0, o.blowup_window);
  return r;
}

}  // namespace detail

/// Blow-up of W_beta data under separable far-field data, a sandwiched
/// datum, and the stability of ell(W_beta)^{m-1} T over a (beta, T) sweep.
inline ExperimentReport exp_blowup(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "blowup";
  rep.inputs = to_json(cfg);
  const ProblemParams& P = cfg.problem;
  const double m = P.m();
  const double T = cfg.datum.T;
  const GridPtr grid = cfg.grid.build(P);
  const PicardKernel kernel(grid, m, T);
  const double b_lo = cfg.num("sandwich_lower", 1.0);
  const double b_hi = cfg.num("sandwich_upper", 2.0);
  if (!(b_lo < b_hi)) throw ConfigError("sandwich_lower must be below sandwich_upper");

  const EllipticProfile main = shoot_profile(kernel, cfg.datum.beta);
  const EllipticProfile lo = shoot_profile(kernel, b_lo);
  const EllipticProfile hi = shoot_profile(kernel, b_hi);
  GridFunction mid = lo.W();
  const GridFunction w_hi = hi.W();
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (mid[i] + w_hi[i]);

  std::vector<double> outputs;
  for (int k = 1; k <= 19; ++k) outputs.push_back(0.05 * k * T);

  std::vector<detail::BlowupRun> runs(2);
  parallel_for(2, ctx.threads, [&](std::size_t k) {
    if (k == 0) {
      runs[0] = detail::run_to_blowup(P, main.W(), BoundaryCondition::separable(main), cfg.solver, T);
    } else {
      const auto bc = BoundaryCondition::separable(mid.values.back(), T, m);
      runs[1] = detail::run_to_blowup(P, mid, bc, cfg.solver, T, outputs);
    }
  });

  auto fit_json = [](const std::optional<BlowupFit>& f) {
    if (!f) return json(nullptr);
    return json{{"T_fit", f->T_fit}, {"slope", f->slope}, {"window_start", f->window_start},
                {"window_end", f->window_end}, {"points", f->points}, {"rms_rel", f->rms_rel}};
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double T_main = runs[0].center_fit ? runs[0].center_fit->T_fit : nan;
  const double T_mid = runs[1].center_fit ? runs[1].center_fit->T_fit : nan;
  rep.measured["profile_residual"] = main.residual;
  rep.measured["center_fit"] = fit_json(runs[0].center_fit);
  rep.measured["sup_fit"] = fit_json(runs[0].traj.blowup);
  rep.measured["sandwich_center_fit"] = fit_json(runs[1].center_fit);
  rep.measured["blowup_detected"] = runs[0].traj.blowup.has_value();

  rep.check("blowup_time", "W_beta data blow up at the profile horizon T", T_main / T,
            cfg.num("T_lo", 0.9), cfg.num("T_hi", 1.1));
  rep.check("sandwich_blowup_time", "data between two profiles blow up at T", T_mid / T,
            cfg.num("sandwich_T_lo", 0.85), cfg.num("sandwich_T_hi", 1.15));

  double worst = 0.0;
  const Trajectory& st = runs[1].traj;
  for (std::size_t k = 0; k < st.snapshots.size(); ++k) {
    const double t = st.times[k];
    if (!(t < T)) continue;
    const GridFunction U1 = separable_solution(lo, t);
    const GridFunction U2 = separable_solution(hi, t);
    for (std::size_t i = 0; i < U1.size(); ++i) {
      const double u = st.snapshots[k][i];
      worst = std::max(worst, std::max(U1[i] - u, u - U2[i]) / U2[i]);
    }
  }
  rep.measured["sandwich_snapshots"] = st.snapshots.size();
  rep.check("sandwich_bounds", "U_beta1 <= u <= U_beta2 for W_beta1 <= u0 <= W_beta2", worst,
            -std::numeric_limits<double>::infinity(), cfg.num("sandwich_tol", 1e-6));

  // ell(W_beta) needs a wide grid; the sweep uses its own profile mesh.
  GridSpec eg;
  eg.spacing = "geometric";
  eg.r_max = cfg.num("ell_R_max", 4000.0);
  eg.cells = cfg.integer("ell_cells", 1500);
  eg.stretch = cfg.num("ell_stretch", 1.008);
  const GridPtr egrid = eg.build(P);
  const auto sweep_b = cfg.list("sweep_beta", {0.5, 1.0, 2.0, 4.0});
  const auto sweep_T = cfg.list("sweep_T", {0.5, 1.0, 2.0});
  std::vector<std::pair<double, double>> combos;
  for (double tt : sweep_T)
    for (double bb : sweep_b) combos.emplace_back(bb, tt);
  std::vector<double> ell(combos.size()), prod(combos.size()), n1(combos.size());
  parallel_for(sweep_T.size(), ctx.threads, [&](std::size_t j) {
    const PicardKernel K(egrid, m, sweep_T[j]);
    for (std::size_t i = 0; i < sweep_b.size(); ++i) {
      const std::size_t k = j * sweep_b.size() + i;
      const EllipticProfile pr = shoot_profile(K, sweep_b[i]);
      const TailReport tail = ell_tail(pr.W(), P);
      ell[k] = tail.limit_estimate;
      n1[k] = tail.reference;
      prod[k] = std::pow(ell[k], m - 1.0) * sweep_T[j];
    }
  });
  json table = json::array();
  double C1_upper = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < combos.size(); ++k) {
    table.push_back({{"beta", combos[k].first}, {"T", combos[k].second}, {"ell", ell[k]},
                     {"norm_1_1", n1[k]}, {"ell_pow_T", prod[k]}});
    C1_upper = std::min(C1_upper, combos[k].second * std::pow(n1[k], m - 1.0));
  }
  const auto [pmin, pmax] = std::minmax_element(prod.begin(), prod.end());
  rep.measured["ell_sweep"] = table;
  rep.measured["C_lower_empirical"] = *pmin;
  rep.measured["C_upper_empirical"] = *pmax;
  rep.measured["C1_upper_bracket"] = C1_upper;
  rep.check("ell_product_stability", "ell(W_beta)^{m-1} T bracketed by two constants",
            *pmax / *pmin, 1.0, cfg.num("ell_ratio_tol", 2.0));

  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, rep.experiment);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < runs[0].traj.step_times.size(); ++k) {
      rows.push_back({runs[0].traj.step_times[k], runs[0].traj.step_sup[k], runs[0].traj.step_center[k]});
    }
    detail::write_rows(dir / "blowup_trace.csv", "time,sup,center", rows);
    rows.clear();
    for (std::size_t k = 0; k < combos.size(); ++k) rows.push_back({combos[k].first, combos[k].second, ell[k], prod[k]});
    detail::write_rows(dir / "ell_sweep.csv", "beta,T,ell,ell_pow_T", rows);
    rep.artifacts = {(dir / "blowup_trace.csv").string(), (dir / "ell_sweep.csv").string()};
  }
  return rep;
}

/// Discrete L^1(rho) contraction, ordering, L^inf non-expansion and mass
/// conservation over random pairs; weighted dependence constant fitted.
inline ExperimentReport exp_contraction_ordering(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "contraction_ordering";
  rep.inputs = to_json(cfg);
  rep.inputs["seed"] = ctx.seed;
  const ProblemParams& P = cfg.problem;
  const GridPtr grid = cfg.grid.build(P);
  const int pairs = cfg.integer("pairs", 20);
  const double centre_max = 0.4 * grid->r_max();
  const double alpha = cfg.norms.alpha > 0.0 ? cfg.norms.alpha : 0.5 * growth_omega(P) + 1.0;
  const Exponents ex = derive_exponents(P);
  const double expo = ex.theta * ex.lambda1;

  std::mt19937_64 rng(derive_seed(ctx.seed, rep.experiment));
  struct Pair {
    std::string kind;
    GridFunction u0, v0;
    Trajectory u, v;
  };
  std::vector<Pair> ps;
  for (int k = 0; k < pairs; ++k) {
    GridFunction a = detail::random_bumps(grid, rng, -1.0, 2.0, centre_max);
    GridFunction b = detail::random_bumps(grid, rng, -1.0, 2.0, centre_max);
    ps.push_back({"contraction", std::move(a), std::move(b), {}, {}});
  }
  for (int k = 0; k < pairs; ++k) {
    GridFunction a = detail::random_bumps(grid, rng, -1.0, 2.0, centre_max);
    GridFunction d = detail::random_bumps(grid, rng, 0.0, 1.0, centre_max);
    GridFunction b = a;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += d[i];
    ps.push_back({"ordered", std::move(a), std::move(b), {}, {}});
  }
  {
    GridFunction a = detail::random_bumps(grid, rng, 0.0, 1.0, centre_max);
    ps.push_back({"identical", a, a, {}, {}});
  }

  SolverOptions o = cfg.solver;
  o.controller.fixed_dt = true;
  o.bc = BoundaryCondition::zero_flux();
  o.keep_snapshots = true;
  parallel_for(2 * ps.size(), ctx.threads, [&](std::size_t j) {
    Pair& p = ps[j / 2];
    if (j % 2 == 0) {
      p.u = solve(P, p.u0, cfg.t_end, o);
    } else {
      p.v = solve(P, p.v0, cfg.t_end, o);
    }
  });

  double worst_factor = 0.0, worst_linf = 0.0, worst_mass = 0.0, identical = 0.0;
  double c_max = 0.0;
  int order_violations = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  const double order_tol = cfg.num("order_tol", 1e-12);
  std::vector<double> c_fits;
  for (const Pair& p : ps) {
    for (const Trajectory* tr : {&p.u, &p.v}) {
      const GridFunction& init = tr->snapshots.front();
      const double sup0 = init.max_abs();
      const double m0 = detail::signed_mass(init);
      const double l10 = l1_rho(init);
      for (const auto& s : tr->snapshots) {
        worst_linf = std::max(worst_linf, s.max_abs() / sup0 - 1.0);
        worst_mass = std::max(worst_mass, std::abs(detail::signed_mass(s) - m0) / l10);
      }
    }
    const double d0 = l1_rho_distance(p.u0, p.v0);
    const double f0 = phi_alpha_distance(p.u0, p.v0, alpha);
    double c = 0.0;
    for (std::size_t k = 0; k < p.u.snapshots.size(); ++k) {
      const auto& a = p.u.snapshots[k];
      const auto& b = p.v.snapshots[k];
      const double d = l1_rho_distance(a, b);
      if (p.kind == "identical") {
        identical = std::max(identical, d);
        continue;
      }
      const double t = p.u.times[k];
      if (t > 0.0) worst_factor = std::max(worst_factor, d / d0);
      if (t > 0.0) c = std::max(c, std::log(std::max(phi_alpha_distance(a, b, alpha) / f0, 1.0)) / std::pow(t, expo));
      if (p.kind == "ordered") {
        const double scale = std::max(1.0, b.max_abs());
        for (std::size_t i = 0; i < a.size(); ++i) {
          worst_gap = std::max(worst_gap, (a[i] - b[i]) / scale);
          if (a[i] > b[i] + order_tol * scale) ++order_violations;
        }
      }
    }
    if (p.kind != "identical") {
      c_fits.push_back(c);
      c_max = std::max(c_max, c);
    }
  }

  // Ordered profile pair under separable far-field data.
  const double pb1 = cfg.num("profile_lower", 1.0);
  const double pb2 = cfg.num("profile_upper", 2.0);
  const double T = cfg.datum.T;
  const PicardKernel kernel(grid, P.m(), T);
  const EllipticProfile w1 = shoot_profile(kernel, pb1);
  const EllipticProfile w2 = shoot_profile(kernel, pb2);
  SolverOptions po = cfg.solver;
  po.controller.fixed_dt = true;
  po.keep_snapshots = true;
  const double t_prof = cfg.num("profile_t_end", 0.5) * T;
  Trajectory tr1, tr2;
  parallel_for(2, ctx.threads, [&](std::size_t k) {
    SolverOptions q = po;
    q.bc = BoundaryCondition::separable(k == 0 ? w1 : w2);
    (k == 0 ? tr1 : tr2) = solve(P, (k == 0 ? w1 : w2).W(), t_prof, q);
  });
  int profile_violations = 0;
  for (std::size_t k = 0; k < tr1.snapshots.size(); ++k) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      if (!(tr1.snapshots[k][i] < tr2.snapshots[k][i])) ++profile_violations;
    }
  }

  std::sort(c_fits.begin(), c_fits.end());
  rep.measured["alpha"] = alpha;
  rep.measured["dependence_exponent"] = expo;
  rep.measured["c_fit_max"] = c_max;
  rep.measured["c_fit_median"] = c_fits.empty() ? 0.0 : c_fits[c_fits.size() / 2];
  rep.measured["dt"] = o.dt_init;
  rep.measured["ordering_worst_gap"] = worst_gap;

  rep.check("l1_contraction", "||u(t)-v(t)||_{L1(rho)} <= ||u0-v0||_{L1(rho)}", worst_factor, 0.0,
            1.0 + cfg.num("contraction_tol", 1e-6));
  rep.check("ordering", "u0 <= v0 implies u(t) <= v(t)", order_violations, 0, 0);
  rep.check("profile_ordering", "ordered profile data stay ordered", profile_violations, 0, 0);
  rep.check("linf_nonexpansion", "||u(t)||_inf <= ||u0||_inf under zero flux", worst_linf,
            -std::numeric_limits<double>::infinity(), cfg.num("linf_tol", 1e-10));
  rep.check("mass_conservation", "int u rho is conserved under zero flux", worst_mass, 0.0,
            cfg.num("mass_tol", 1e-6));
  rep.check("identical_pair", "identical data give identical solutions", identical, 0.0, 0.0);
  rep.check("weighted_dependence_fit", "Phi_alpha distance grows at most like exp(c t^{theta lambda1})",
            c_max, 0.0);

  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, rep.experiment);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const double d0 = l1_rho_distance(ps[k].u0, ps[k].v0);
      if (d0 == 0.0) continue;
      rows.push_back({static_cast<double>(k), d0, l1_rho_distance(ps[k].u.final_state, ps[k].v.final_state)});
    }
    detail::write_rows(dir / "pairs.csv", "pair,l1_initial,l1_final", rows);
    rep.artifacts = {(dir / "pairs.csv").string()};
  }
  return rep;
}

namespace detail {

/// Worst decrease of t^{1/(m-1)} u between consecutive recorded times,
/// relative to the largest recorded value of t^{1/(m-1)} u.
inline double bc_violation(const Trajectory& tr, double m) {
  const double q = 1.0 / (m - 1.0);
  double scale = 0.0;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    scale = std::max(scale, std::pow(tr.times[k], q) * tr.snapshots[k].max_abs());
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.snapshots.size(); ++k) {
    const double f0 = std::pow(tr.times[k], q);
    const double f1 = std::pow(tr.times[k + 1], q);
    for (std::size_t i = 0; i < tr.snapshots[k].size(); ++i) {
      worst = std::max(worst, f0 * tr.snapshots[k][i] - f1 * tr.snapshots[k + 1][i]);
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace detail

/// t^{1/(m-1)} u(y,t) nondecreasing in t for nonnegative zero-flux runs.
inline ExperimentReport exp_bc_monotonicity(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "bc_monotonicity";
  rep.inputs = to_json(cfg);
  const ProblemParams& P = cfg.problem;
  const GridPtr grid = cfg.grid.build(P);
  const double n = cfg.num("critical_n", 10.0);

  std::vector<std::pair<std::string, GridFunction>> data;
  data.emplace_back("compact", compact_profile(grid, P, cfg.datum.c1, cfg.datum.c2, cfg.datum.c3));
  data.emplace_back("constant", GridFunction::sample(grid, [&](double) { return cfg.datum.scale; }));
  const double cr = P.critical_rate();
  data.emplace_back("critical_truncated",
                    truncate_datum(GridFunction::sample(grid, [&](double y) { return std::pow(y, cr); }), n));
  for (const auto& [name, u0] : data) {
    for (double v : u0.values) {
      if (v < 0.0) throw ConfigError("Benilan-Crandall check needs nonnegative data (" + name + ")");
    }
  }

  SolverOptions o = cfg.solver;
  o.bc = BoundaryCondition::zero_flux();
  o.keep_snapshots = true;
  o.output_times = log_schedule(cfg.t_end, o.output_count);
  std::vector<double> viol(data.size());
  parallel_for(data.size(), ctx.threads, [&](std::size_t k) {
    viol[k] = detail::bc_violation(solve(P, data[k].second, cfg.t_end, o), P.m());
  });
  const double tol = cfg.num("violation_tol", 1e-6);
  for (std::size_t k = 0; k < data.size(); ++k) {
    rep.measured[data[k].first] = viol[k];
    rep.check("monotone_" + data[k].first, "t^{1/(m-1)} u(y,t) nondecreasing in t", viol[k],
              -std::numeric_limits<double>::infinity(), tol);
  }
  return rep;
}

namespace detail {

struct SmoothingRun {
  std::string label;
  double C2 = 0.0;
  double C3 = 0.0;
  double norm0 = 0.0;
  std::vector<double> times, ratio;
};

inline SmoothingRun smoothing_run(const ProblemParams& P, const GridFunction& u0, const SolverOptions& base,
                                  double r, double t_min, double t_max) {
  const Exponents ex = derive_exponents(P);
  SmoothingRun out;
  out.norm0 = norm_1r(u0, P, r).value;
  if (!(out.norm0 > 0.0)) throw ConfigError("smoothing experiment needs a datum with nonzero norm");
  SolverOptions o = base;
  o.bc = BoundaryCondition::zero_flux();
  o.keep_snapshots = false;
  o.norm_r = r;
  o.output_times = log_schedule(t_max, o.output_count, t_min / t_max);
  const Trajectory tr = solve(P, u0, t_max, o);
  const double denom = std::pow(out.norm0, ex.theta * ex.lambda1);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    if (t < t_min * (1.0 - 1e-12)) continue;
    const double c3 = tr.norm_inf_r[k] * std::pow(t, ex.lambda1) / denom;
    out.times.push_back(t);
    out.ratio.push_back(c3);
    out.C3 = std::max(out.C3, c3);
    out.C2 = std::max(out.C2, tr.norm_1r[k] / out.norm0);
  }
  return out;
}

}  // namespace detail

/// Smoothing ratio ||u(t)||_{inf,r} t^{lambda1} / ||u0||_{1,r}^{theta lambda1}
/// over a window of times; stability under refinement and truncation level.
inline ExperimentReport exp_smoothing(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "smoothing";
  rep.inputs = to_json(cfg);
  const ProblemParams& P = cfg.problem;
  const double r = cfg.norms.r;
  const double t_min = cfg.num("t_min", 1e-3);
  const double t_max = cfg.t_end;
  const double n_base = cfg.datum.n > 0.0 ? cfg.datum.n : 20.0;
  const auto n_sweep = cfg.list("n_sweep", {10.0, 20.0, 40.0});
  const double tol = cfg.num("stability_tol", 0.2);

  struct Job {
    std::string label;
    GridSpec grid;
    std::string family;
    double n;
  };
  std::vector<Job> jobs{{"base", cfg.grid, cfg.datum.kind, n_base},
                        {"refined", cfg.grid.refined(2), cfg.datum.kind, n_base}};
  for (double n : n_sweep) {
    if (n != n_base) jobs.push_back({"n=" + std::to_string(static_cast<int>(n)), cfg.grid, cfg.datum.kind, n});
  }
  jobs.push_back({"compact", cfg.grid, "compact", 0.0});
  jobs.push_back({"compact_refined", cfg.grid.refined(2), "compact", 0.0});

  std::vector<detail::SmoothingRun> runs(jobs.size());
  parallel_for(jobs.size(), ctx.threads, [&](std::size_t k) {
    const Job& j = jobs[k];
    const GridPtr g = j.grid.build(P);
    DatumSpec d = cfg.datum;
    d.kind = j.family;
    d.n = j.n;
    const PreparedDatum pd = build_datum(d, P, g);
    runs[k] = detail::smoothing_run(P, pd.u0, cfg.solver, r, t_min, t_max);
    runs[k].label = j.label;
  });

  const Exponents ex = derive_exponents(P);
  json table = json::array();
  for (const auto& run : runs) {
    table.push_back({{"label", run.label}, {"C2", run.C2}, {"C3", run.C3}, {"norm0", run.norm0},
                     {"existence_time_C1_1", existence_time(run.norm0, P.m())}});
  }
  rep.measured["lambda1"] = ex.lambda1;
  rep.measured["theta_lambda1"] = ex.theta * ex.lambda1;
  rep.measured["runs"] = table;
  rep.measured["window"] = {t_min, t_max};

  const auto& base = runs[0];
  rep.check("C3_bounded", "smoothing ratio bounded on the time window", base.C3, 0.0,
            std::numeric_limits<double>::max());
  rep.check("C2_bounded", "||u(t)||_{1,r} / ||u0||_{1,r} bounded on the time window", base.C2, 0.0,
            std::numeric_limits<double>::max());
  for (std::size_t k = 1; k < runs.size(); ++k) {
    const auto& ref = runs[k].label.rfind("compact", 0) == 0 ? runs[runs.size() - 2] : base;
    if (&ref == &runs[k]) continue;
    rep.check("C3_stability_" + runs[k].label, "empirical smoothing constant independent of discretization",
              std::abs(runs[k].C3 / ref.C3 - 1.0), 0.0, tol);
  }

  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, rep.experiment);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      for (std::size_t i = 0; i < runs[k].times.size(); ++i) {
        rows.push_back({static_cast<double>(k), runs[k].times[i], runs[k].ratio[i]});
      }
    }
    detail::write_rows(dir / "smoothing_ratio.csv", "run,time,ratio", rows);
    rep.artifacts = {(dir / "smoothing_ratio.csv").string()};
  }
  return rep;
}

/// Norm battery: closed forms for power data, equivalence with the cut-off
/// norms, the L^1(Phi_alpha) embedding, truncation convergence, the limsup
/// identity and the exponent identity.
inline ExperimentReport exp_norm_suite(const ExperimentConfig& cfg, const RunContext& ctx) {
  ExperimentReport rep;
  rep.experiment = "norm_suite";
  rep.inputs = to_json(cfg);
  rep.inputs["seed"] = ctx.seed;
  const ProblemParams& P = cfg.problem;
  const GridPtr grid = cfg.grid.build(P);
  const double r = cfg.norms.r;
  const int N = P.N();
  const double g = P.gamma();
  const double cr = P.critical_rate();
  const double sigma = unit_sphere_area(N);
  std::mt19937_64 rng(derive_seed(ctx.seed, rep.experiment));
  const double inf = std::numeric_limits<double>::infinity();

  // Closed forms for f = y^s with 0 <= s <= cr (exact power weight): the
  // supremum sits at R = r, or is constant in R when s = cr.
  if (P.weight().is_exact_power()) {
    double worst = 0.0;
    json table = json::array();
    for (double s : cfg.list("powers", {0.0, 0.5, 1.0})) {
      if (s > cr) throw ConfigError("closed-form powers must not exceed the critical rate");
      const GridFunction f = GridFunction::sample(grid, [&](double y) { return std::pow(y, s); });
      for (double p : {1.0, 2.0, inf}) {
        double exact, num;
        if (std::isinf(p)) {
          exact = std::pow(r, s - cr);
          num = norm_inf_r(f, P, r).value;
        } else {
          const double q = p * s + N - g;
          exact = std::pow(sigma / q, 1.0 / p) * std::pow(r, s - cr);
          num = norm_pr(f, P, p, r).value;
        }
        const double err = std::abs(num / exact - 1.0);
        worst = std::max(worst, err);
        table.push_back({{"s", s}, {"p", std::isinf(p) ? json("inf") : json(p)}, {"exact", exact},
                         {"numerical", num}, {"relative_error", err}});
      }
    }
    rep.measured["closed_forms"] = table;
    rep.check("closed_form_norms", "||y^s||_{p,r} matches its closed form", worst, 0.0,
              cfg.num("closed_form_tol", 0.005));
  }

  // Random data with at most critical growth.
  const int samples = cfg.integer("random_samples", 100);
  std::vector<GridFunction> data;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < samples; ++k) {
    GridFunction f = detail::random_bumps(grid, rng, -2.0, 2.0, 0.2 * grid->r_max());
    const double a = U(rng) - 0.3;
    const double s = cr * U(rng);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += a * std::pow(f.radius(i), s);
    data.push_back(std::move(f));
  }
  int equiv_violations = 0;
  int monotone_violations = 0;
  double worst_lower = -inf, worst_upper = -inf;
  for (const auto& f : data) {
    for (double p : {1.0, 2.0}) {
      const double a = P.norm_exponent(p);
      const double plain_half = norm_pr(f, P, p, r, 0.5 * grid->r_max()).value;
      const double plain = norm_pr(f, P, p, r).value;
      const double cut = cutoff_norm_pr(f, P, p, r).value;
      worst_lower = std::max(worst_lower, plain_half / cut - 1.0);
      worst_upper = std::max(worst_upper, cut / (std::pow(2.0, a) * plain) - 1.0);
      if (plain_half > cut * (1.0 + 1e-12) || cut > std::pow(2.0, a) * plain * (1.0 + 1e-12)) ++equiv_violations;
      if (norm_pr(f, P, p, 2.0 * r).value > plain * (1.0 + 1e-12)) ++monotone_violations;
    }
  }
  rep.measured["equivalence_worst_lower"] = worst_lower;
  rep.measured["equivalence_worst_upper"] = worst_upper;
  rep.check("norm_equivalence", "||f||_{p,r} <= |f|_{p,r} <= 2^{a_p} ||f||_{p,r}", equiv_violations, 0, 0);
  rep.check("norm_monotone_in_r", "||f||_{p,r} nonincreasing in r", monotone_violations, 0, 0);

  // Embedding into L^1(Phi_alpha).
  const double alpha = cfg.norms.alpha > 0.0 ? cfg.norms.alpha : cfg.num("embedding_alpha", 3.0);
  double min_slack = inf;
  const GridFunction crit = GridFunction::sample(grid, [&](double y) { return std::pow(y, cr); });
  for (const GridFunction* f : {&crit}) min_slack = std::min(min_slack, embedding_bound(*f, P, alpha, r).slack);
  for (const auto& f : data) min_slack = std::min(min_slack, embedding_bound(f, P, alpha, r).slack);
  const EmbeddingCheck ec = embedding_bound(crit, P, alpha, r);
  rep.measured["embedding"] = {{"alpha", alpha}, {"omega", growth_omega(P)}, {"lhs", ec.lhs},
                               {"constant", ec.constant}, {"rhs", ec.rhs}, {"slack", ec.slack}};
  rep.check("embedding_bound", "||f||_{L1(Phi_alpha)} <= C(r,alpha) ||f||_{1,r}", min_slack, 0.0);

  // Truncation convergence: f = 1 lies in X_0, the critical power does not.
  const GridFunction one = GridFunction::sample(grid, [](double) { return 1.0; });
  const auto ns = cfg.list("truncation_levels", {10.0, 20.0, 40.0});
  std::vector<double> d_one, d_crit;
  for (double n : ns) {
    auto dist = [&](const GridFunction& f) {
      GridFunction diff = f;
      const GridFunction fn = truncate_datum(f, n);
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= fn[i];
      return norm_1r(diff, P, r).value;
    };
    d_one.push_back(dist(one));
    d_crit.push_back(dist(crit));
  }
  const TailReport tail_one = ell_tail(one, P);
  const TailReport tail_crit = ell_tail(crit, P);
  rep.measured["truncation"] = {{"levels", ns}, {"distance_one", d_one}, {"distance_critical", d_crit},
                                {"ell_one", tail_one.limit_estimate}, {"ell_critical", tail_crit.limit_estimate}};
  rep.check("X0_member_classified", "ell(1) = 0", tail_one.in_X0 ? 1.0 : 0.0, 1.0, 1.0);
  rep.check("X0_nonmember_classified", "ell(|x|^{(2-gamma)/(m-1)}) > 0", tail_crit.in_X0 ? 1.0 : 0.0, 0.0, 0.0);
  rep.check("truncation_converges_in_X0", "||f - f_n||_{1,r} -> 0 for f in X_0",
            d_one.back() / d_one.front(), 0.0, cfg.num("truncation_decay", 0.5));
  rep.check("truncation_stalls_outside_X0", "||f - f_n||_{1,r} >= ell(f) outside X_0",
            d_crit.back() / tail_crit.limit_estimate, cfg.num("truncation_floor", 0.9));

  // limsup identity on an oscillating critical-growth datum.
  const GridFunction osc = GridFunction::sample(grid, [&](double y) {
    return std::pow(y, cr) * (1.0 + 0.5 * std::sin(y));
  });
  double worst_limsup = 0.0;
  json ls = json::array();
  for (const GridFunction* f : {&crit, &osc}) {
    const LimsupReport lr = limsup_rate(*f, P);
    worst_limsup = std::max(worst_limsup, lr.discrepancy / lr.far_ratio);
    ls.push_back({{"tail_norm", lr.tail_norm}, {"far_ratio", lr.far_ratio}, {"r_tail", lr.r_tail}});
  }
  rep.measured["limsup"] = ls;
  rep.check("limsup_identity", "lim_r ||f||_{inf,r} = limsup |x|^{-(2-gamma)/(m-1)} |f|", worst_limsup, 0.0,
            cfg.num("limsup_tol", 0.01));

  // theta lambda1 + lambda1 (m-1) = 1.
  std::uniform_int_distribution<int> dimN(3, 12);
  std::uniform_real_distribution<double> dm(1.0, 6.0);
  std::uniform_real_distribution<double> dg(0.0, 2.0);
  double worst_id = 0.0;
  const int triples = cfg.integer("exponent_triples", 1000);
  for (int k = 0; k < triples; ++k) {
    const int n = dimN(rng);
    double m = dm(rng);
    if (m <= 1.0) m = std::nextafter(1.0, 2.0);
    const double gg = dg(rng);
    const Exponents e = derive_exponents(ProblemParams(n, m, WeightSpec::pure_power(gg)));
    worst_id = std::max(worst_id, std::abs(e.theta * e.lambda1 + e.kappa - 1.0));
  }
  rep.check("exponent_identity", "theta lambda1 + lambda1 (m-1) = 1", worst_id, 0.0,
            cfg.num("identity_tol", 1e-14));

  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, rep.experiment);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < ns.size(); ++k) rows.push_back({ns[k], d_one[k], d_crit[k]});
    detail::write_rows(dir / "truncation.csv", "n,distance_one,distance_critical", rows);
    rep.artifacts = {(dir / "truncation.csv").string()};
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

using ExperimentFn = ExperimentReport (*)(const ExperimentConfig&, const RunContext&);

inline const std::map<std::string, ExperimentFn>& experiment_registry() {
  static const std::map<std::string, ExperimentFn> reg{
      {"explicit_convergence", &exp_explicit_convergence},
      {"profile_shooting", &exp_profile_shooting},
      {"blowup", &exp_blowup},
      {"contraction_ordering", &exp_contraction_ordering},
      {"bc_monotonicity", &exp_bc_monotonicity},
      {"smoothing", &exp_smoothing},
      {"norm_suite", &exp_norm_suite},
  };
  return reg;
}

inline std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : experiment_registry()) out.push_back(k);
  return out;
}

/// Desk-scale defaults of each experiment (N=3, gamma=1, m=2 throughout).
inline ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "explicit_convergence") {
    c.grid = {50.0, 400, "graded", 2.0, 1.0};
    c.datum.kind = "explicit";
    c.t_end = 0.5;
    c.bc = "explicit";
    c.solver.dt_init = 1e-3;
    c.solver.controller.fixed_dt = true;
  } else if (name == "profile_shooting") {
    c.grid = {1e4, 2000, "geometric", 2.0, 1.008};
    c.datum.kind = "profile";
  } else if (name == "blowup") {
    c.grid = {20.0, 400, "graded", 2.0, 1.0};
    c.datum.kind = "profile";
    c.bc = "separable";
    c.solver.dt_init = 1e-3;
    c.solver.dt_max = 0.02;
    c.solver.blowup_factor = 1e4;
    c.solver.blowup_window = 20;
  } else if (name == "contraction_ordering") {
    c.grid = {20.0, 200, "graded", 2.0, 1.0};
    c.t_end = 0.5;
    c.solver.dt_init = 5e-3;
    c.solver.newton_tol = 1e-13;
    c.solver.output_count = 10;
  } else if (name == "bc_monotonicity") {
    c.grid = {20.0, 200, "graded", 2.0, 1.0};
    c.t_end = 0.1;
    c.datum.kind = "compact";
    c.solver.dt_init = 1e-6;
    c.solver.output_count = 60;
  } else if (name == "smoothing") {
    c.grid = {100.0, 400, "graded", 2.0, 1.0};
    c.datum.kind = "power";
    c.datum.n = 20.0;
    c.t_end = 0.1;
    c.solver.dt_init = 1e-6;
    c.solver.output_count = 30;
  } else if (name == "norm_suite") {
    c.grid = {400.0, 800, "graded", 2.0, 1.0};
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return c;
}

inline ExperimentReport run_experiment(const std::string& name, const ExperimentConfig& cfg,
                                       const RunContext& ctx) {
  auto it = experiment_registry().find(name);
  if (it == experiment_registry().end()) throw ConfigError("unknown experiment '" + name + "'");
  ExperimentReport rep = it->second(cfg, ctx);
  if (!ctx.out_dir.empty()) {
    const auto dir = detail::artifact_dir(ctx, name);
    std::ofstream os(dir / "report.json");
    os << std::setw(2) << rep.to_json() << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Single-run commands
// ---------------------------------------------------------------------------

/// Solves the configured problem; writes trajectory.csv (time,radius,value)
/// and returns norm traces and events.
inline json run_solve(const ExperimentConfig& cfg, const RunContext& ctx) {
  const ProblemParams& P = cfg.problem;
  const GridPtr grid = cfg.grid.build(P);
  const PreparedDatum d = build_datum(cfg.datum, P, grid);
  SolverOptions o = cfg.solver;
  o.bc = build_bc(cfg.bc, d, P, cfg.norms.r);
  const Trajectory tr = solve(P, d.u0, cfg.t_end, o);
  json j;
  j["inputs"] = to_json(cfg);
  j["bc"] = tr.bc_provenance;
  j["t_reached"] = tr.t_reached;
  j["times"] = tr.times;
  j["norm_1r"] = tr.norm_1r;
  j["norm_inf_r"] = tr.norm_inf_r;
  j["mass"] = tr.mass;
  j["phi_alpha"] = tr.phi_alpha;
  j["norm_r"] = tr.norm_r;
  j["alpha"] = tr.alpha;
  j["steps"] = tr.dt_history.size();
  j["newton_failures"] = tr.newton_failures;
  j["events"] = json::array();
  for (const auto& e : tr.events) j["events"].push_back({{"kind", e.kind}, {"t", e.t}, {"detail", e.detail}});
  if (tr.blowup) {
    j["blowup"] = {{"T_fit", tr.blowup->T_fit}, {"slope", tr.blowup->slope}, {"rms_rel", tr.blowup->rms_rel},
                   {"window_start", tr.blowup->window_start}, {"window_end", tr.blowup->window_end}};
  }
  if (!ctx.out_dir.empty()) {
    std::filesystem::create_directories(ctx.out_dir);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      for (std::size_t i = 0; i < tr.snapshots[k].size(); ++i) {
        rows.push_back({tr.times[k], tr.snapshots[k].radius(i), tr.snapshots[k][i]});
      }
    }
    detail::write_rows(ctx.out_dir / "trajectory.csv", "time,radius,value", rows);
    std::ofstream(ctx.out_dir / "solve.json") << std::setw(2) << j << '\n';
  }
  return j;
}

/// Shoots W_beta for the configured (beta, T); writes profile.csv.
inline json run_profile(const ExperimentConfig& cfg, const RunContext& ctx) {
  const ProblemParams& P = cfg.problem;
  const GridPtr grid = cfg.grid.build(P);
  const EllipticProfile pr = shoot_profile(P, cfg.datum.beta, cfg.datum.T, grid);
  json j{{"beta", pr.beta}, {"T", pr.T}, {"picard_iters", pr.picard_iters}, {"residual", pr.residual},
         {"asymptotic_slope", pr.asymptotic_slope}, {"defect", profile_defect(pr)},
         {"target_slope", (2.0 - P.gamma()) * P.m() / (P.m() - 1.0)}};
  if (!ctx.out_dir.empty()) {
    std::filesystem::create_directories(ctx.out_dir);
    write_profile_csv((ctx.out_dir / "profile.csv").string(), pr);
  }
  return j;
}

/// Every norm of the configured datum.
inline json run_norms(const ExperimentConfig& cfg) {
  const ProblemParams& P = cfg.problem;
  const GridPtr grid = cfg.grid.build(P);
  const PreparedDatum d = build_datum(cfg.datum, P, grid);
  const double r = cfg.norms.r;
  const double p = cfg.norms.p;
  const double alpha = cfg.norms.alpha > 0.0 ? cfg.norms.alpha : 0.5 * growth_omega(P) + 1.0;
  auto nr = [](const NormReport& n) {
    return json{{"value", n.value}, {"argmax_R", n.argmax_R}, {"truncation_note", n.truncation_note}};
  };
  const TailReport tail = ell_tail(d.u0, P);
  const EmbeddingCheck e = embedding_bound(d.u0, P, alpha, r);
  const LimsupReport ls = limsup_rate(d.u0, P);
  const PhiAlphaReport pa = norm_phi_alpha(d.u0, P, alpha, r);
  return json{{"r", r},
              {"p", p},
              {"alpha", alpha},
              {"norm_p_r", nr(norm_pr(d.u0, P, p, r))},
              {"norm_1_r", nr(norm_1r(d.u0, P, r))},
              {"norm_inf_r", nr(norm_inf_r(d.u0, P, r))},
              {"cutoff_norm_p_r", nr(cutoff_norm_pr(d.u0, P, p, r))},
              {"ell", {{"radii", tail.radii}, {"values", tail.values}, {"limit", tail.limit_estimate},
                       {"in_X0", tail.in_X0}}},
              {"phi_alpha", {{"value", pa.value}, {"tail_bound", detail::number(pa.tail_bound)}}},
              {"embedding", {{"lhs", e.lhs}, {"constant", e.constant}, {"rhs", e.rhs}, {"slack", e.slack}}},
              {"limsup", {{"r_tail", ls.r_tail}, {"tail_norm", ls.tail_norm}, {"far_ratio", ls.far_ratio}}},
              {"existence_time_C1_1", existence_time(norm_1r(d.u0, P, r).value, P.m())}};
}

/// Brackets C1 in T(u0) = C1 / ||u0||_{1,r}^{m-1} on W_beta data: blow-up
/// times give an upper bracket, barrier existence times a lower one.
inline json run_calibrate(const ExperimentConfig& cfg, const RunContext& ctx) {
  const ProblemParams& P = cfg.problem;
  const double m = P.m();
  const double r = cfg.norms.r;
  const GridPtr grid = cfg.grid.build(P);
  const auto betas = cfg.list("sweep_beta", {0.5, 1.0, 2.0});
  const auto Ts = cfg.list("sweep_T", {0.5, 1.0, 2.0});
  std::vector<std::pair<double, double>> combos;
  for (double T : Ts)
    for (double b : betas) combos.emplace_back(b, T);
  std::vector<json> rows(combos.size());
  std::vector<double> upper(combos.size()), lower(combos.size());
  parallel_for(combos.size(), ctx.threads, [&](std::size_t k) {
    const auto [b, T] = combos[k];
    const EllipticProfile pr = shoot_profile(P, b, T, grid);
    const GridFunction w = pr.W();
    const detail::BlowupRun run = detail::run_to_blowup(P, w, BoundaryCondition::separable(pr), cfg.solver, T);
    const double T_fit = run.center_fit ? run.center_fit->T_fit : std::numeric_limits<double>::quiet_NaN();
    const double n1 = norm_1r(w, P, r).value;
    const Barrier bar = calibrate_barrier(w, P, r);
    upper[k] = T_fit * std::pow(n1, m - 1.0);
    lower[k] = bar.S * std::pow(n1, m - 1.0);
    rows[k] = {{"beta", b}, {"T", T}, {"T_fit", detail::number(T_fit)}, {"norm_1_r", n1},
               {"barrier_S", bar.S}, {"C1_from_blowup", detail::number(upper[k])}, {"C1_from_barrier", lower[k]}};
  });
  json j;
  j["runs"] = rows;
  j["C1_upper"] = detail::number(*std::min_element(upper.begin(), upper.end()));
  j["C1_lower"] = *std::max_element(lower.begin(), lower.end());
  j["consistent"] = j["C1_upper"].is_number() && j["C1_lower"].get<double>() <= j["C1_upper"].get<double>();
  if (!ctx.out_dir.empty()) {
    std::filesystem::create_directories(ctx.out_dir);
    std::ofstream(ctx.out_dir / "calibrate.json") << std::setw(2) << j << '\n';
  }
  return j;
}

}  // namespace wpme
