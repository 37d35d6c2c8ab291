#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wpme/errors.hpp"
#include "wpme/model.hpp"

namespace wpme {

/// Vertex-centred radial mesh 0 = y_0 < y_1 < ... < y_M = R_max.
///
/// Node i owns the control volume [e_i, e_{i+1}] with e_0 = 0,
/// e_i = (y_{i-1} + y_i) / 2 and e_{M+1} = R_max, so the first and last
/// control volumes are half cells. Control-volume rho-masses are integrated
/// exactly against the weight, never by sampling rho at the origin.
class RadialGrid {
 public:
  RadialGrid(WeightSpec weight, int N, std::vector<double> nodes)
      : weight_(std::move(weight)), N_(N), nodes_(std::move(nodes)) {
    if (N_ < 3) throw ConfigError("grid dimension must be >= 3");
    if (nodes_.size() < 3 || nodes_.front() != 0.0) {
      throw ConfigError("grid nodes must start at 0 and contain >= 3 points");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
        throw ConfigError("grid nodes must be finite and strictly increasing");
      }
    }
    const std::size_t n = nodes_.size();
    edges_.resize(n + 1);
    edges_[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) edges_[i] = 0.5 * (nodes_[i - 1] + nodes_[i]);
    edges_[n] = nodes_.back();

    cv_mass_.resize(n);
    cv_left_mass_.resize(n);
    cum_mass_.resize(n + 1);
    cum_mass_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cv_left_mass_[i] = weight_cell_mass(weight_, N_, edges_[i], nodes_[i]);
      cv_mass_[i] = cv_left_mass_[i] +
                    weight_cell_mass(weight_, N_, nodes_[i], edges_[i + 1]);
      cum_mass_[i + 1] = cum_mass_[i] + cv_mass_[i];
      if (!(cv_mass_[i] > 0.0) || !std::isfinite(cv_mass_[i])) {
        throw NumericError("non-positive control-volume mass");
      }
    }
  }

  const WeightSpec& weight() const { return weight_; }
  int N() const { return N_; }
  std::size_t size() const { return nodes_.size(); }
  /// Number of primal cells M (= size() - 1).
  std::size_t cells() const { return nodes_.size() - 1; }
  double r_max() const { return nodes_.back(); }

  const std::vector<double>& nodes() const { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  /// Control-volume edges, size() + 1 entries.
  const std::vector<double>& cv_edges() const { return edges_; }
  const std::vector<double>& cv_mass() const { return cv_mass_; }
  const std::vector<double>& cv_left_mass() const { return cv_left_mass_; }
  /// Cumulative rho-mass at each control-volume edge.
  const std::vector<double>& cumulative_mass() const { return cum_mass_; }

  /// Index j of the control volume with e_j <= R < e_{j+1} (last one for R_max).
  std::size_t cv_index(double R) const {
    if (R >= edges_.back()) return size() - 1;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), R);
    return static_cast<std::size_t>(it - edges_.begin()) - 1;
  }

  /// rho-mass of [e_j, R] for R inside control volume j; exact.
  double partial_mass(std::size_t j, double R) const {
    if (R == edges_[j]) return 0.0;
    if (R == nodes_[j]) return cv_left_mass_[j];
    if (R >= edges_[j + 1]) return cv_mass_[j];
    return weight_cell_mass(weight_, N_, edges_[j], R);
  }

 private:
  WeightSpec weight_;
  int N_;
  std::vector<double> nodes_;
  std::vector<double> edges_;
  std::vector<double> cv_mass_;
  std::vector<double> cv_left_mass_;
  std::vector<double> cum_mass_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Geometric mesh of M cells on [0, R_max]; consecutive cell widths grow by
/// `stretch` (1 gives a uniform mesh).
inline GridPtr make_grid(const WeightSpec& weight, int N, double r_max, int M,
                         double stretch = 1.0) {
  if (!std::isfinite(r_max) || !(r_max > 0.0)) {
    throw ConfigError("make_grid: R_max must be positive and finite");
  }
  if (M < 16) throw ConfigError("make_grid: need at least 16 cells");
  if (!std::isfinite(stretch) || !(stretch >= 1.0)) {
    throw ConfigError("make_grid: stretch must be finite and >= 1");
  }
  std::vector<double> nodes(static_cast<std::size_t>(M) + 1);
  nodes[0] = 0.0;
  if (stretch == 1.0) {
    for (int i = 1; i <= M; ++i) nodes[i] = r_max * i / M;
  } else {
    const double total = (std::pow(stretch, M) - 1.0) / (stretch - 1.0);
    const double h0 = r_max / total;
    double h = h0;
    for (int i = 1; i <= M; ++i) {
      nodes[i] = nodes[i - 1] + h;
      h *= stretch;
    }
  }
  nodes[M] = r_max;
  return std::make_shared<const RadialGrid>(weight, N, std::move(nodes));
}

inline GridPtr make_grid(const ProblemParams& params, double r_max, int M,
                         double stretch = 1.0) {
  return make_grid(params.weight(), params.N(), r_max, M, stretch);
}

/// Power-graded mesh y_i = R_max (i/M)^p. With p = 2 cell widths scale like
/// sqrt(y), which balances the lumping error of the singular weight near the
/// origin.
inline GridPtr make_graded_grid(const WeightSpec& weight, int N, double r_max, int M,
                                double power = 2.0) {
  if (!std::isfinite(r_max) || !(r_max > 0.0)) {
    throw ConfigError("make_graded_grid: R_max must be positive and finite");
  }
  if (M < 16) throw ConfigError("make_graded_grid: need at least 16 cells");
  if (!(power >= 1.0) || !(power <= 4.0)) {
    throw ConfigError("make_graded_grid: power must lie in [1, 4]");
  }
  std::vector<double> nodes(static_cast<std::size_t>(M) + 1);
  for (int i = 0; i <= M; ++i) nodes[i] = r_max * std::pow(static_cast<double>(i) / M, power);
  nodes[M] = r_max;
  return std::make_shared<const RadialGrid>(weight, N, std::move(nodes));
}

inline GridPtr make_graded_grid(const ProblemParams& params, double r_max, int M,
                                double power = 2.0) {
  return make_graded_grid(params.weight(), params.N(), r_max, M, power);
}

/// Radial samples u(y_i) on a grid.
struct GridFunction {
  GridPtr grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid || values.size() != grid->size()) {
      throw ConfigError("GridFunction: value count does not match grid");
    }
  }

  static GridFunction zeros(GridPtr g) {
    std::vector<double> v(g->size(), 0.0);
    return GridFunction(std::move(g), std::move(v));
  }

  template <class F>
  static GridFunction sample(GridPtr g, F&& f) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->node(i));
    return GridFunction(std::move(g), std::move(v));
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double radius(std::size_t i) const { return grid->node(i); }

  double max_abs() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
  }
  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
};

/// Lumped quadrature of integrand values g_i over B_R: sum of g_i times the
/// control-volume masses, with the control volume containing R split exactly.
inline double integrate_lumped(const RadialGrid& grid, const std::vector<double>& g, double R) {
  if (!(R >= 0.0)) throw DomainError("integration radius must be >= 0");
  if (R > grid.r_max() * (1.0 + 1e-14)) {
    throw DomainError("integration radius exceeds grid R_max");
  }
  R = std::min(R, grid.r_max());
  const std::size_t j = grid.cv_index(R);
  double sum = 0.0;
  const auto& mass = grid.cv_mass();
  for (std::size_t i = 0; i < j; ++i) sum += g[i] * mass[i];
  return sum + g[j] * grid.partial_mass(j, R);
}

/// Weighted integral of f over B_R: the discrete counterpart of
/// \int_{B_R} f rho dx. Exact in the weight, trapezoidal in the values.
inline double integrate_weighted(const GridFunction& f, double R) {
  return integrate_lumped(*f.grid, f.values, R);
}

/// Discrete L^1(rho) norm over the whole grid.
inline double l1_rho(const GridFunction& f) {
  double s = 0.0;
  const auto& mass = f.grid->cv_mass();
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i]) * mass[i];
  return s;
}

/// Discrete L^1(rho) distance of two functions on the same grid.
inline double l1_rho_distance(const GridFunction& a, const GridFunction& b) {
  double s = 0.0;
  const auto& mass = a.grid->cv_mass();
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]) * mass[i];
  return s;
}

inline void write_csv(std::ostream& os, const GridFunction& f) {
  os << "radius,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) os << f.radius(i) << ',' << f[i] << '\n';
}

inline void write_csv(const std::string& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_csv(os, f);
}

/// Reads a two-column radius,value CSV (header row required) and linearly
/// interpolates it onto `grid`. The table must cover [0, R_max].
inline GridFunction read_csv(const std::string& path, GridPtr grid) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open datum file " + path);
  std::string line;
  std::getline(is, line);
  std::vector<double> r;
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a = 0.0;
    double b = 0.0;
    if (!(ls >> a >> b)) throw ConfigError("malformed row in " + path + ": " + line);
    if (!r.empty() && !(a > r.back())) throw ConfigError("radii not increasing in " + path);
    r.push_back(a);
    v.push_back(b);
  }
  if (r.size() < 2) throw ConfigError(path + ": need at least two rows");
  if (r.front() > 0.0 || r.back() < grid->r_max()) {
    throw ConfigError(path + ": table does not cover [0, R_max]");
  }
  return GridFunction::sample(grid, [&](double y) {
    auto it = std::upper_bound(r.begin(), r.end(), y);
    std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - r.begin()), 1, r.size() - 1);
    const double s = (y - r[k - 1]) / (r[k] - r[k - 1]);
    return v[k - 1] + s * (v[k] - v[k - 1]);
  });
}

}  // namespace wpme
