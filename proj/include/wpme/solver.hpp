#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wpme/errors.hpp"
#include "wpme/grid.hpp"
#include "wpme/model.hpp"
#include "wpme/norms.hpp"
#include "wpme/profiles.hpp"

namespace wpme {

enum class BcMode { dirichlet_separable, dirichlet_barrier, dirichlet_explicit, zero_flux };

inline std::string to_string(BcMode mode) {
  switch (mode) {
    case BcMode::dirichlet_separable: return "dirichlet_separable";
    case BcMode::dirichlet_barrier: return "dirichlet_barrier";
    case BcMode::dirichlet_explicit: return "dirichlet_explicit";
    case BcMode::zero_flux: return "zero_flux";
  }
  return "unknown";
}

/// Closure at y = R_max: reflecting, or time-dependent Dirichlet data taken
/// from a known solution or supersolution family.
struct BoundaryCondition {
  BcMode mode = BcMode::zero_flux;
  /// dirichlet_separable: profile value at R_max, horizon T and exponent m.
  double outer_value = 0.0;
  double horizon = std::numeric_limits<double>::infinity();
  double m = 2.0;
  std::optional<Barrier> barrier;
  std::optional<ExplicitFamily> family;

  static BoundaryCondition zero_flux() { return {}; }

  /// Dirichlet data (1 - t/T)^{-1/(m-1)} w_outer. With w_outer = W_beta(R_max)
  /// this is the trace of the separable solution U_beta.
  static BoundaryCondition separable(double outer_value, double T, double m) {
    BoundaryCondition bc;
    bc.mode = BcMode::dirichlet_separable;
    bc.outer_value = outer_value;
    bc.horizon = T;
    bc.m = m;
    return bc;
  }
  static BoundaryCondition separable(const EllipticProfile& prof) {
    return separable(std::pow(prof.V.values.back(), 1.0 / prof.m), prof.T, prof.m);
  }
  static BoundaryCondition from_barrier(const Barrier& b) {
    BoundaryCondition bc;
    bc.mode = BcMode::dirichlet_barrier;
    bc.barrier = b;
    bc.horizon = b.S;
    bc.m = b.m;
    return bc;
  }
  static BoundaryCondition from_family(const ExplicitFamily& f) {
    BoundaryCondition bc;
    bc.mode = BcMode::dirichlet_explicit;
    bc.family = f;
    bc.horizon = f.T();
    return bc;
  }

  bool is_dirichlet() const { return mode != BcMode::zero_flux; }

  std::string provenance() const {
    std::ostringstream os;
    os << to_string(mode);
    switch (mode) {
      case BcMode::dirichlet_separable:
        os << "(W_outer=" << outer_value << ", T=" << horizon << ")";
        break;
      case BcMode::dirichlet_barrier:
        os << "(A=" << barrier->A << ", S=" << barrier->S << ")";
        break;
      case BcMode::dirichlet_explicit:
        os << "(a=" << family->a() << ", b=" << family->b() << ", T=" << family->T() << ")";
        break;
      case BcMode::zero_flux:
        break;
    }
    return os.str();
  }
};

/// Value imposed at the outer radius R at time t. For zero_flux the ghost
/// value mirrors the interior value `interior`.
inline double bc_value(const BoundaryCondition& bc, double t, double R, double interior = 0.0) {
  switch (bc.mode) {
    case BcMode::zero_flux:
      return interior;
    case BcMode::dirichlet_separable:
      if (!(t < bc.horizon)) throw DomainError("separable boundary data at or beyond T");
      return bc.outer_value * std::pow(1.0 - t / bc.horizon, -1.0 / (bc.m - 1.0));
    case BcMode::dirichlet_barrier:
      if (!bc.barrier) throw ConfigError("barrier boundary condition without barrier");
      return bc.barrier->value(R, t);
    case BcMode::dirichlet_explicit:
      if (!bc.family) throw ConfigError("explicit boundary condition without family");
      return bc.family->value(R, t);
  }
  return 0.0;
}

struct ControllerOptions {
  /// Keep dt = dt_init (clipped only at output times and horizons).
  bool fixed_dt = false;
  int newton_low = 2;
  int newton_high = 5;
  double grow = 1.5;
  double shrink = 0.5;
  /// Target relative max-norm change of u per step.
  double change_target = 0.05;
  /// Near blow-up: dt <= blowup_cap * (T_running - t).
  double blowup_cap = 0.05;
};

struct SolverOptions {
  double dt_init = 1e-4;
  double dt_max = 1e-2;
  double dt_min = 1e-14;
  double newton_tol = 1e-11;
  int newton_max_iters = 40;
  double jacobian_eps = 1e-12;
  BoundaryCondition bc;
  /// Absolute sup-norm trigger; <= 0 selects blowup_factor * sup|u0|.
  double blowup_threshold = 0.0;
  double blowup_factor = 1e6;
  int blowup_window = 20;
  ControllerOptions controller;
  /// Recording schedule; empty selects `output_count` log-spaced times in
  /// [1e-3 t_end, t_end].
  std::vector<double> output_times;
  int output_count = 30;
  bool keep_snapshots = true;
  /// Radius r of the ||.||_{1,r}, ||.||_{inf,r} traces and alpha of the
  /// L^1(Phi_alpha) trace (<= 0 selects omega/2 + 1).
  double norm_r = 1.0;
  double alpha = 0.0;
};

struct BlowupFit {
  double T_fit = 0.0;
  double slope = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  int points = 0;
  /// RMS residual of the affine fit relative to the window's mean of sup^{-(m-1)}.
  double rms_rel = 0.0;
};

struct SolverEvent {
  std::string kind;  // "blowup", "newton_failure"
  double t = 0.0;
  std::string detail;
};

/// Recorded output of a run.
struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  std::vector<double> norm_1r;
  std::vector<double> norm_inf_r;
  std::vector<double> mass;
  std::vector<double> phi_alpha;

  /// Every accepted step: time, sup |u|, u at the origin, dt and Newton iterations.
  std::vector<double> step_times;
  std::vector<double> step_sup;
  std::vector<double> step_center;
  std::vector<double> dt_history;
  std::vector<int> newton_history;

  std::vector<SolverEvent> events;
  std::optional<BlowupFit> blowup;
  int newton_failures = 0;
  double t_reached = 0.0;
  GridFunction final_state;
  std::string bc_provenance;
  double norm_r = 1.0;
  double alpha = 0.0;
};

struct StepResult {
  GridFunction state;
  int newton_iters = 0;
  bool converged = false;
  double residual = 0.0;
};

namespace detail {

/// Solves a tridiagonal system in place (lower[0] and upper[n-1] unused).
inline void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                   std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

inline double signed_power(double u, double m) { return std::copysign(std::pow(std::abs(u), m), u); }

/// Edge transmissibilities sigma_N e^{N-1} / (y_{i+1} - y_i), one per primal cell.
inline std::vector<double> transmissibilities(const RadialGrid& g) {
  const double sigma = unit_sphere_area(g.N());
  std::vector<double> tr(g.cells());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    tr[i] = sigma * std::pow(g.cv_edges()[i + 1], g.N() - 1) / (g.node(i + 1) - g.node(i));
  }
  return tr;
}

}  // namespace detail

/// One implicit Euler step of
///   mass_i (u_i - u_i^old) / dt = T_{i+1/2}(V_{i+1} - V_i) - T_{i-1/2}(V_i - V_{i-1}),
/// V = |u|^{m-1} u, solved by damped Newton. `t_new` is the time at the end of
/// the step (used for Dirichlet data). Reports non-convergence instead of
/// throwing.
inline StepResult try_step(const GridFunction& state, double dt, double t_new,
                           const BoundaryCondition& bc, const ProblemParams& params,
                           const SolverOptions& opts = {}) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  const RadialGrid& g = *state.grid;
  const std::size_t n = g.size();
  const double m = params.m();
  const auto tr = detail::transmissibilities(g);
  const auto& mass = g.cv_mass();
  const std::size_t unknowns = bc.is_dirichlet() ? n - 1 : n;

  StepResult res;
  res.state = state;
  std::vector<double>& u = res.state.values;
  if (bc.is_dirichlet()) u[n - 1] = bc_value(bc, t_new, g.r_max());

  std::vector<double> V(n);
  auto residual = [&](const std::vector<double>& uu, std::vector<double>& F) {
    for (std::size_t i = 0; i < n; ++i) V[i] = detail::signed_power(uu[i], m);
    double worst = 0.0;
    for (std::size_t i = 0; i < unknowns; ++i) {
      double div = 0.0;
      if (i + 1 < n) div += tr[i] * (V[i + 1] - V[i]);
      if (i > 0) div -= tr[i - 1] * (V[i] - V[i - 1]);
      F[i] = mass[i] * (uu[i] - state[i]) / dt - div;
      worst = std::max(worst, std::abs(F[i]) * dt / mass[i]);
    }
    return worst;
  };

  std::vector<double> F(unknowns), lower(unknowns), diag(unknowns), upper(unknowns), delta(unknowns);
  std::vector<double> trial(n);
  double rnorm = residual(u, F);
  for (int it = 0; it < opts.newton_max_iters; ++it) {
    double scale = 1.0;
    for (double v : u) scale = std::max(scale, std::abs(v));
    if (rnorm <= opts.newton_tol * scale && it > 0) {
      res.converged = true;
      break;
    }
    for (std::size_t i = 0; i < unknowns; ++i) {
      const double dv = m * std::pow(std::abs(u[i]), m - 1.0) + opts.jacobian_eps;
      double d = mass[i] / dt;
      if (i + 1 < n) d += tr[i] * dv;
      if (i > 0) d += tr[i - 1] * dv;
      diag[i] = d;
      lower[i] = i > 0 ? -tr[i - 1] * (m * std::pow(std::abs(u[i - 1]), m - 1.0) + opts.jacobian_eps) : 0.0;
      upper[i] = i + 1 < unknowns
                     ? -tr[i] * (m * std::pow(std::abs(u[i + 1]), m - 1.0) + opts.jacobian_eps)
                     : 0.0;
      delta[i] = -F[i];
    }
    detail::thomas(lower, diag, upper, delta);
    double lambda = 1.0;
    double tnorm = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      trial = u;
      for (std::size_t i = 0; i < unknowns; ++i) trial[i] = u[i] + lambda * delta[i];
      tnorm = residual(trial, F);
      if (std::isfinite(tnorm) && (tnorm < rnorm || tnorm <= opts.newton_tol * scale)) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    res.newton_iters = it + 1;
    if (!accepted) {
      residual(u, F);
      break;
    }
    double step = 0.0;
    for (std::size_t i = 0; i < unknowns; ++i) step = std::max(step, std::abs(trial[i] - u[i]));
    u.swap(trial);
    rnorm = tnorm;
    if (rnorm <= opts.newton_tol * scale && step <= 1e3 * opts.newton_tol * scale) {
      res.converged = true;
      break;
    }
  }
  res.residual = rnorm;
  return res;
}

/// Throwing variant of try_step.
inline GridFunction step_implicit(const GridFunction& state, double dt, double t_new,
                                  const BoundaryCondition& bc, const ProblemParams& params,
                                  const SolverOptions& opts = {}) {
  StepResult r = try_step(state, dt, t_new, bc, params, opts);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "Newton did not converge (dt=" << dt << ", residual=" << r.residual << ")";
    throw NumericError(msg.str());
  }
  return std::move(r.state);
}

/// Least-squares fit of sup^{-(m-1)} = slope (t - T_fit) over the last
/// `window` points. Returns nullopt when the trace never reaches `threshold`
/// or is not growing.
inline std::optional<BlowupFit> detect_blowup(const std::vector<double>& times,
                                              const std::vector<double>& sup, double m,
                                              double threshold, int window = 20) {
  if (times.size() != sup.size()) throw DomainError("detect_blowup: trace lengths differ");
  if (sup.empty() || !(sup.back() >= threshold)) return std::nullopt;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), times.size());
  if (w < 3) throw DomainError("detect_blowup: fewer than 3 points in the fit window");
  const std::size_t start = times.size() - w;
  double st = 0, sb = 0, stt = 0, stb = 0;
  std::vector<double> B(w);
  for (std::size_t k = 0; k < w; ++k) {
    const double t = times[start + k];
    B[k] = std::pow(sup[start + k], -(m - 1.0));
    st += t;
    sb += B[k];
    stt += t * t;
    stb += t * B[k];
  }
  const double n = static_cast<double>(w);
  const double slope = (n * stb - st * sb) / (n * stt - st * st);
  const double icpt = (sb - slope * st) / n;
  if (!(slope < 0.0)) return std::nullopt;
  BlowupFit fit;
  fit.slope = slope;
  fit.T_fit = -icpt / slope;
  fit.window_start = times[start];
  fit.window_end = times.back();
  fit.points = static_cast<int>(w);
  double ss = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    const double r = B[k] - (icpt + slope * times[start + k]);
    ss += r * r;
  }
  fit.rms_rel = std::sqrt(ss / n) / (sb / n);
  return fit;
}

/// Log-spaced recording schedule of `count` times in [1e-3 t_end, t_end].
inline std::vector<double> log_schedule(double t_end, int count, double first_fraction = 1e-3) {
  std::vector<double> out;
  if (count <= 1) return {t_end};
  const double a = std::log(first_fraction * t_end);
  const double b = std::log(t_end);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * i / (count - 1)));
  out.back() = t_end;
  return out;
}

/// Integrates from u0 at t = 0 to t_end, or until the sup norm crosses the
/// blow-up threshold (recorded as an event, not an error). Throws
/// NumericError when Newton cannot converge even at dt_min.
inline Trajectory solve(const ProblemParams& params, const GridFunction& u0, double t_end,
                        const SolverOptions& opts) {
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  if (!u0.all_finite()) throw DomainError("initial datum is not finite");
  if (u0.grid->N() != params.N()) throw ConfigError("grid dimension differs from problem N");
  const BoundaryCondition& bc = opts.bc;

  Trajectory tr;
  tr.bc_provenance = bc.provenance();
  tr.norm_r = opts.norm_r;
  tr.alpha = opts.alpha > 0.0 ? opts.alpha : 0.5 * growth_omega(params) + 1.0;

  std::vector<double> outputs = opts.output_times.empty() ? log_schedule(t_end, opts.output_count)
                                                          : opts.output_times;
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::remove_if(outputs.begin(), outputs.end(),
                               [&](double t) { return !(t > 0.0) || t > t_end; }),
                outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  if (outputs.empty() || outputs.back() < t_end) outputs.push_back(t_end);

  const double sup0 = u0.max_abs();
  const double threshold = opts.blowup_threshold > 0.0
                               ? opts.blowup_threshold
                               : opts.blowup_factor * std::max(sup0, 1e-300);

  auto record = [&](double t, const GridFunction& u) {
    tr.times.push_back(t);
    if (opts.keep_snapshots) tr.snapshots.push_back(u);
    tr.norm_1r.push_back(norm_1r(u, params, opts.norm_r).value);
    tr.norm_inf_r.push_back(norm_inf_r(u, params, opts.norm_r).value);
    tr.mass.push_back(l1_rho(u));
    tr.phi_alpha.push_back(norm_phi_alpha(u, params, tr.alpha, opts.norm_r).value);
  };

  GridFunction u = u0;
  double t = 0.0;
  record(0.0, u);
  tr.step_times.push_back(0.0);
  tr.step_sup.push_back(sup0);
  tr.step_center.push_back(u0[0]);

  double dt = opts.dt_init;
  double T_running = std::numeric_limits<double>::infinity();
  std::size_t next_out = 0;
  const auto& ctl = opts.controller;

  while (next_out < outputs.size()) {
    const double target = outputs[next_out];
    double h = ctl.fixed_dt ? opts.dt_init : std::min(dt, opts.dt_max);
    if (std::isfinite(T_running) && T_running > t) h = std::min(h, ctl.blowup_cap * (T_running - t));
    if (std::isfinite(bc.horizon)) h = std::min(h, 0.5 * (bc.horizon - t));
    bool hits_output = false;
    if (t + h >= target * (1.0 - 1e-13)) {
      h = target - t;
      hits_output = true;
    }

    StepResult step;
    for (;;) {
      const double t_new = hits_output ? target : t + h;
      step = try_step(u, h, t_new, bc, params, opts);
      if (step.converged && step.state.all_finite()) break;
      ++tr.newton_failures;
      std::ostringstream msg;
      msg << "dt=" << h << " residual=" << step.residual;
      tr.events.push_back({"newton_failure", t, msg.str()});
      h *= 0.5;
      hits_output = false;
      if (h < opts.dt_min) {
        tr.t_reached = t;
        tr.final_state = u;
        throw NumericError("Newton failed at t=" + std::to_string(t) + " with dt below dt_min");
      }
    }

    double change = 0.0;
    const double scale = std::max(u.max_abs(), 1e-300);
    for (std::size_t i = 0; i < u.size(); ++i) change = std::max(change, std::abs(step.state[i] - u[i]));
    change /= scale;

    t = hits_output ? target : t + h;
    u = std::move(step.state);
    const double sup = u.max_abs();
    tr.step_times.push_back(t);
    tr.step_sup.push_back(sup);
    tr.step_center.push_back(u[0]);
    tr.dt_history.push_back(h);
    tr.newton_history.push_back(step.newton_iters);

    if (hits_output) {
      record(t, u);
      ++next_out;
    }

    if (sup >= threshold) {
      tr.blowup = detect_blowup(tr.step_times, tr.step_sup, params.m(), threshold, opts.blowup_window);
      std::ostringstream msg;
      msg << "sup|u|=" << sup << " >= threshold " << threshold;
      if (tr.blowup) msg << "; T_fit=" << tr.blowup->T_fit;
      tr.events.push_back({"blowup", t, msg.str()});
      if (!hits_output) record(t, u);
      break;
    }

    const std::size_t k = tr.step_sup.size();
    if (k >= 2) {
      const double b1 = std::pow(tr.step_sup[k - 1], -(params.m() - 1.0));
      const double b0 = std::pow(tr.step_sup[k - 2], -(params.m() - 1.0));
      const double slope = (b1 - b0) / (tr.step_times[k - 1] - tr.step_times[k - 2]);
      T_running = slope < 0.0 ? t - b1 / slope : std::numeric_limits<double>::infinity();
    }

    if (!ctl.fixed_dt) {
      if (step.newton_iters > ctl.newton_high || change > 2.0 * ctl.change_target) {
        dt = h * ctl.shrink;
      } else if (step.newton_iters <= ctl.newton_low && change < ctl.change_target) {
        dt = std::max(dt, h) * ctl.grow;
      } else {
        dt = std::max(dt, h);
      }
      dt = std::clamp(dt, opts.dt_min, opts.dt_max);
    }
  }
  tr.t_reached = t;
  tr.final_state = u;
  return tr;
}

/// How a truncated datum is extended beyond B_n.
enum class DatumPreparation {
  /// tau_n(u0) chi_{B_n}: zero outside the ball of radius n.
  zero_extension,
  /// tau_n(u0) everywhere, keeping the datum compatible with far-field
  /// Dirichlet data.
  clamp_only,
};

inline GridFunction prepare_datum(const GridFunction& u0, double n, DatumPreparation prep) {
  if (prep == DatumPreparation::zero_extension) return truncate_datum(u0, n);
  if (!(n > 0.0)) throw DomainError("truncation level n must be positive");
  GridFunction out = u0;
  for (double& v : out.values) v = std::clamp(v, -n, n);
  return out;
}

}  // namespace wpme
