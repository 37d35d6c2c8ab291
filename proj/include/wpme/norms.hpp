#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wpme/errors.hpp"
#include "wpme/grid.hpp"
#include "wpme/model.hpp"

namespace wpme {

/// Supremum of a growth-weighted functional over radii R >= r.
struct NormReport {
  double value = 0.0;
  /// Probe radius where the supremum is attained.
  double argmax_R = 0.0;
  /// Set when the supremum sits at the last probe radius: the value is then
  /// only a lower bound for the supremum over all R >= r.
  bool truncation_note = false;
};

/// Fixed smooth cut-off: 1 on [0,1], 0 on [2,inf), degree-7 smoothstep in
/// between (C^3 at both junctions, nonincreasing).
struct CutoffProfile {
  double operator()(double x) const {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double s = x - 1.0;
    const double s4 = s * s * s * s;
    const double step = s4 * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
    return 1.0 - step;
  }
};

/// Phi_alpha(y) = (1 + y^2)^{-alpha}.
struct PhiAlpha {
  double alpha;
  explicit PhiAlpha(double a) : alpha(a) {
    if (!(a > 0.0)) throw DomainError("Phi_alpha needs alpha > 0");
  }
  double operator()(double y) const { return std::pow(1.0 + y * y, -alpha); }
};

namespace detail {

inline void check_norm_inputs(const GridFunction& f, const ProblemParams& params, double r,
                              double r_cap) {
  if (f.grid->N() != params.N()) throw ConfigError("grid dimension differs from problem N");
  if (!(r >= 1.0)) throw DomainError("norm radius r must be >= 1");
  if (r > r_cap) throw DomainError("norm radius r exceeds the probe range (R_max)");
}

/// Probe radii {r} U {nodes, cv edges in (r, r_cap]} in increasing order.
inline std::vector<double> probe_radii(const RadialGrid& grid, double r, double r_cap) {
  std::vector<double> probes{r};
  const auto& y = grid.nodes();
  const auto& e = grid.cv_edges();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (e[i] > r && e[i] <= r_cap && e[i] > probes.back()) probes.push_back(e[i]);
    if (y[i] > r && y[i] <= r_cap && y[i] > probes.back()) probes.push_back(y[i]);
  }
  return probes;
}

/// sup_{R in probes} R^{-exponent} (int_{B_R} g rho)^{1/p} for nonnegative
/// node values g.
inline NormReport sup_integral(const RadialGrid& grid, const std::vector<double>& g,
                               double exponent, double p, double r, double r_cap) {
  const auto probes = probe_radii(grid, r, r_cap);
  const auto& mass = grid.cv_mass();
  NormReport rep;
  rep.value = -1.0;
  std::size_t j = 0;
  double prefix = 0.0;  // sum over control volumes fully below e_j
  for (double R : probes) {
    const std::size_t jr = grid.cv_index(R);
    while (j < jr) {
      prefix += g[j] * mass[j];
      ++j;
    }
    const double integral = prefix + g[j] * grid.partial_mass(j, R);
    const double val = std::pow(R, -exponent) * std::pow(std::max(integral, 0.0), 1.0 / p);
    if (val > rep.value) {
      rep.value = val;
      rep.argmax_R = R;
    }
  }
  rep.truncation_note = rep.argmax_R == probes.back() && probes.size() > 1;
  return rep;
}

}  // namespace detail

/// ||f||_{p,r} = sup_{R>=r} R^{-(2-gamma)/(m-1)-(N-gamma)/p} (int_{B_R}|f|^p rho)^{1/p}
/// for 1 <= p < inf. Probes R at r and every node and control-volume edge up
/// to `r_cap` (default R_max).
inline NormReport norm_pr(const GridFunction& f, const ProblemParams& params, double p, double r,
                          double r_cap = -1.0) {
  if (r_cap < 0.0) r_cap = f.grid->r_max();
  detail::check_norm_inputs(f, params, r, r_cap);
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("norm_pr needs 1 <= p < inf");
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::abs(f[i]), p);
  return detail::sup_integral(*f.grid, g, params.norm_exponent(p), p, r, r_cap);
}

inline NormReport norm_1r(const GridFunction& f, const ProblemParams& params, double r,
                          double r_cap = -1.0) {
  return norm_pr(f, params, 1.0, r, r_cap);
}

/// ||f||_{inf,r} = sup_{R>=r} R^{-(2-gamma)/(m-1)} max_{y_i <= R} |f(y_i)|.
inline NormReport norm_inf_r(const GridFunction& f, const ProblemParams& params, double r,
                             double r_cap = -1.0) {
  if (r_cap < 0.0) r_cap = f.grid->r_max();
  detail::check_norm_inputs(f, params, r, r_cap);
  const double a = params.critical_rate();
  const auto& y = f.grid->nodes();
  NormReport rep;
  rep.value = -1.0;
  double running = 0.0;
  std::size_t i = 0;
  auto consider = [&](double R) {
    while (i < y.size() && y[i] <= R) running = std::max(running, std::abs(f[i++]));
    const double val = running * std::pow(R, -a);
    if (val > rep.value) {
      rep.value = val;
      rep.argmax_R = R;
    }
  };
  consider(r);
  double last = r;
  for (double yi : y) {
    if (yi > r && yi <= r_cap) {
      consider(yi);
      last = yi;
    }
  }
  rep.truncation_note = rep.argmax_R == last && last > r;
  return rep;
}

/// |f|_{p,r}: the cut-off variant sup_{R>=r} R^{-a_p} (int |phi_R f|^p rho)^{1/p}
/// with phi_R(y) = phi(y/R). The cut-off reaches 2R, so probes stop at R_max/2.
inline NormReport cutoff_norm_pr(const GridFunction& f, const ProblemParams& params, double p,
                                 double r, const CutoffProfile& phi = {}) {
  const RadialGrid& grid = *f.grid;
  const double r_cap = 0.5 * grid.r_max();
  detail::check_norm_inputs(f, params, r, r_cap);
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("cutoff_norm_pr needs 1 <= p < inf");
  const double a = params.norm_exponent(p);
  const auto& y = grid.nodes();
  const auto& mass = grid.cv_mass();
  const auto probes = detail::probe_radii(grid, r, r_cap);
  NormReport rep;
  rep.value = -1.0;
  for (double R : probes) {
    double integral = 0.0;
    for (std::size_t i = 0; i < y.size() && y[i] < 2.0 * R; ++i) {
      integral += std::pow(phi(y[i] / R) * std::abs(f[i]), p) * mass[i];
    }
    const double val = std::pow(R, -a) * std::pow(integral, 1.0 / p);
    if (val > rep.value) {
      rep.value = val;
      rep.argmax_R = R;
    }
  }
  rep.truncation_note = rep.argmax_R == probes.back() && probes.size() > 1;
  return rep;
}

/// Constant c with ||f||_{p,r} <= c ||f||_{q,r} for 1 <= p < q < inf on this
/// grid: (sup_{R>=r} mass(B_R) / R^{N-gamma})^{1/p - 1/q}.
inline double holder_constant(const RadialGrid& grid, const ProblemParams& params, double p,
                              double q, double r) {
  if (!(p >= 1.0 && q > p)) throw DomainError("holder_constant needs 1 <= p < q");
  std::vector<double> ones(grid.size(), 1.0);
  const NormReport w =
      detail::sup_integral(grid, ones, params.N() - params.gamma(), 1.0, r, grid.r_max());
  const double inv = 1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q);
  return std::pow(w.value, inv);
}

/// Tail functional: ||f||_{1,r} along an increasing schedule of radii and an
/// extrapolated limit.
struct TailReport {
  std::vector<double> radii;
  std::vector<double> values;
  double limit_estimate = 0.0;
  /// ||f||_{1,1}, the scale the X_0 classification is relative to.
  double reference = 0.0;
  double tolerance = 1e-3;
  bool in_X0 = false;
};

/// Geometric schedule 1, 2, 4, ... up to R_max / 2.
inline std::vector<double> default_tail_schedule(const RadialGrid& grid) {
  std::vector<double> s;
  for (double r = 1.0; r <= 0.5 * grid.r_max() * (1.0 + 1e-12); r *= 2.0) s.push_back(r);
  return s;
}

/// Values of ||f||_{1,r} along `schedule` plus an Aitken delta-squared limit
/// from the last three values (exact for geometric decay on a geometric
/// schedule), clamped to [0, last value]. f is classified into X_0 when the
/// limit is below `tolerance` times ||f||_{1,1}.
inline TailReport ell_tail(const GridFunction& f, const ProblemParams& params,
                           const std::vector<double>& schedule, double tolerance = 1e-3) {
  if (schedule.size() < 3) throw DomainError("ell_tail: schedule needs at least 3 radii");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1.0 || schedule[i] > 0.5 * f.grid->r_max() * (1.0 + 1e-12)) {
      throw DomainError("ell_tail: schedule must lie in [1, R_max/2]");
    }
    if (i > 0 && !(schedule[i] > schedule[i - 1])) {
      throw DomainError("ell_tail: schedule must be increasing");
    }
  }
  TailReport rep;
  rep.tolerance = tolerance;
  rep.radii = schedule;
  for (double r : schedule) rep.values.push_back(norm_1r(f, params, r).value);
  rep.reference = norm_1r(f, params, 1.0).value;

  const std::size_t n = rep.values.size();
  const double v1 = rep.values[n - 3];
  const double v2 = rep.values[n - 2];
  const double v3 = rep.values[n - 1];
  const double d1 = v2 - v1;
  const double d2 = v3 - v2;
  const double denom = d2 - d1;
  double est = v3;
  if (std::abs(denom) > 1e-14 * std::max(std::abs(v3), 1e-300) && d1 * d2 > 0.0) {
    est = v3 - d2 * d2 / denom;
  }
  rep.limit_estimate = std::clamp(est, 0.0, v3);
  rep.in_X0 = rep.limit_estimate <= tolerance * rep.reference;
  return rep;
}

inline TailReport ell_tail(const GridFunction& f, const ProblemParams& params,
                           double tolerance = 1e-3) {
  return ell_tail(f, params, default_tail_schedule(*f.grid), tolerance);
}

/// omega = (2-gamma)/(m-1) + N - gamma.
inline double growth_omega(const ProblemParams& params) { return params.norm_exponent(1.0); }

/// alpha > (2-gamma)/(2(m-1)) + (N-gamma)/2, the range where X embeds into
/// L^1(Phi_alpha).
inline bool alpha_admissible(const ProblemParams& params, double alpha) {
  return alpha > 0.5 * growth_omega(params);
}

struct PhiAlphaReport {
  double value = 0.0;
  /// Upper bound of the part of the integral beyond R_max, estimated from
  /// ||f||_{1,r}; +inf when 2 alpha <= omega.
  double tail_bound = 0.0;
};

/// ||f||_{L^1(Phi_alpha)} = int |f| Phi_alpha rho over the grid.
inline PhiAlphaReport norm_phi_alpha(const GridFunction& f, const ProblemParams& params,
                                     double alpha, double r = 1.0) {
  const PhiAlpha phi(alpha);
  const auto& mass = f.grid->cv_mass();
  PhiAlphaReport rep;
  for (std::size_t i = 0; i < f.size(); ++i) rep.value += std::abs(f[i]) * phi(f.radius(i)) * mass[i];
  const double omega = growth_omega(params);
  const double excess = 2.0 * alpha - omega;
  if (excess > 0.0) {
    const double M = norm_1r(f, params, r).value;
    rep.tail_bound = 2.0 * alpha * M * std::pow(f.grid->r_max(), -excess) / excess;
  } else {
    rep.tail_bound = std::numeric_limits<double>::infinity();
  }
  return rep;
}

/// Discrete L^1(Phi_alpha) distance of two functions on one grid.
inline double phi_alpha_distance(const GridFunction& a, const GridFunction& b, double alpha) {
  const PhiAlpha phi(alpha);
  const auto& mass = a.grid->cv_mass();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]) * phi(a.radius(i)) * mass[i];
  return s;
}

struct EmbeddingCheck {
  double lhs = 0.0;       // ||f||_{L^1(Phi_alpha)}
  double constant = 0.0;  // r^omega + 2 alpha r^{-(2 alpha - omega)} / (2 alpha - omega)
  double norm = 0.0;      // ||f||_{1,r}
  double rhs = 0.0;       // constant * norm
  double slack = 0.0;     // rhs - lhs
};

/// Both sides of ||f||_{L^1(Phi_alpha)} <= C(r, alpha) ||f||_{1,r}.
inline EmbeddingCheck embedding_bound(const GridFunction& f, const ProblemParams& params,
                                      double alpha, double r) {
  if (!alpha_admissible(params, alpha)) {
    throw DomainError("embedding bound needs alpha > (2-gamma)/(2(m-1)) + (N-gamma)/2");
  }
  const double omega = growth_omega(params);
  const double excess = 2.0 * alpha - omega;
  EmbeddingCheck c;
  c.lhs = norm_phi_alpha(f, params, alpha, r).value;
  c.constant = std::pow(r, omega) + 2.0 * alpha * std::pow(r, -excess) / excess;
  c.norm = norm_1r(f, params, r).value;
  c.rhs = c.constant * c.norm;
  c.slack = c.rhs - c.lhs;
  return c;
}

struct LimsupReport {
  double r_tail = 0.0;
  /// ||f||_{inf, r_tail}
  double tail_norm = 0.0;
  /// max over nodes y >= r_tail of |f(y)| y^{-(2-gamma)/(m-1)}
  double far_ratio = 0.0;
  double discrepancy = 0.0;
};

/// Both sides of lim_r ||f||_{inf,r} = limsup_{|x|->inf} |x|^{-(2-gamma)/(m-1)}|f|,
/// evaluated at r_tail (default R_max / 4).
inline LimsupReport limsup_rate(const GridFunction& f, const ProblemParams& params,
                                double r_tail = -1.0) {
  if (r_tail < 0.0) r_tail = 0.25 * f.grid->r_max();
  LimsupReport rep;
  rep.r_tail = r_tail;
  rep.tail_norm = norm_inf_r(f, params, r_tail).value;
  const double a = params.critical_rate();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double y = f.radius(i);
    if (y >= r_tail) rep.far_ratio = std::max(rep.far_ratio, std::abs(f[i]) * std::pow(y, -a));
  }
  rep.discrepancy = std::abs(rep.tail_norm - rep.far_ratio);
  return rep;
}

/// f_n = tau_n(f) chi_{B_n}: values clamped to [-n, n], zero for radius >= n.
inline GridFunction truncate_datum(const GridFunction& f, double n) {
  if (!(n > 0.0)) throw DomainError("truncation level n must be positive");
  GridFunction out = f;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = out.radius(i) < n ? std::clamp(f[i], -n, n) : 0.0;
  }
  return out;
}

}  // namespace wpme
