#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wpme/errors.hpp"
#include "wpme/grid.hpp"
#include "wpme/model.hpp"
#include "wpme/norms.hpp"

namespace wpme {

// ---------------------------------------------------------------------------
// Explicit blow-up family for rho = |x|^{-gamma}
// ---------------------------------------------------------------------------

/// u(y,t) = [a T^k/(T-t)^k + k/(m(2-g)(N-g)) y^{2-g}/(T-t)]^{1/(m-1)} with
/// k = lambda1 (m-1) and T = k/(m(2-g)(N-g) b); datum (a + b y^{2-g})^{1/(m-1)}.
class ExplicitFamily {
 public:
  ExplicitFamily(const ProblemParams& params, double a, double b)
      : m_(params.m()), gamma_(params.gamma()), a_(a), b_(b) {
    if (!params.weight().is_exact_power()) {
      throw ConfigError("explicit family requires the pure power weight");
    }
    if (!(a >= 0.0) || !(b > 0.0)) throw ConfigError("explicit family needs a >= 0, b > 0");
    const Exponents e = derive_exponents(params);
    kappa_ = e.kappa;
    coef_ = kappa_ / (m_ * (2.0 - gamma_) * (params.N() - gamma_));
    T_ = coef_ / b_;
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double kappa() const { return kappa_; }
  double T() const { return T_; }
  /// k / (m (2-gamma)(N-gamma)).
  double coefficient() const { return coef_; }

  double value(double y, double t) const {
    if (!(t < T_)) throw DomainError("explicit family evaluated at or beyond its blow-up time");
    if (!(y >= 0.0)) throw DomainError("explicit family needs y >= 0");
    const double rem = T_ - t;
    const double base = a_ * std::pow(T_ / rem, kappa_) + coef_ * std::pow(y, 2.0 - gamma_) / rem;
    return std::pow(base, 1.0 / (m_ - 1.0));
  }

  GridFunction sample(GridPtr grid, double t) const {
    return GridFunction::sample(std::move(grid), [&](double y) { return value(y, t); });
  }

 private:
  double m_;
  double gamma_;
  double a_;
  double b_;
  double kappa_ = 0.0;
  double coef_ = 0.0;
  double T_ = 0.0;
};

inline double explicit_value(const ExplicitFamily& family, double y, double t) {
  return family.value(y, t);
}

// ---------------------------------------------------------------------------
// Elliptic profiles W_beta via Picard iteration of the radial integral equation
//   V(y) = beta^m + int_0^y z^{1-N} int_0^z s^{N-1} rho(s) V(s)^{1/m} / (T(m-1)) ds dz
// with V = W^m.
// ---------------------------------------------------------------------------

/// Discrete integral operator on a fixed grid. Per primal cell the source
/// V^{1/m} is interpolated linearly and integrated exactly against the
/// weight; the moments are computed once by quadrature.
class PicardKernel {
 public:
  PicardKernel(GridPtr grid, double m, double T) : grid_(std::move(grid)), m_(m), T_(T) {
    if (!(T > 0.0)) throw ConfigError("profile horizon T must be positive");
    scale_ = 1.0 / (T * (m - 1.0));
    const auto& y = grid_->nodes();
    const std::size_t cells = y.size() - 1;
    A_.resize(cells);
    B_.resize(cells);
    C_.resize(cells);
    D_.resize(cells);
    E_.resize(cells);
    const int N = grid_->N();
    const WeightSpec& w = grid_->weight();
    for (std::size_t k = 0; k < cells; ++k) {
      const double a = y[k];
      const double b = y[k + 1];
      const double h = b - a;
      // int_s^b z^{1-N} dz, written to avoid cancellation for s close to b
      auto tail = [&](double s) {
        if (s <= 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(b, 2.0 - N) * std::expm1((2.0 - N) * std::log(s / b)) / (N - 2.0);
      };
      auto dens = [&](double s) { return s > 0.0 ? w(s) * std::pow(s, N - 1) : 0.0; };
      auto l0 = [&](double s) { return (b - s) / h; };
      auto l1 = [&](double s) { return (s - a) / h; };
      A_[k] = k == 0 ? 0.0 : tail(a);
      D_[k] = integrate(k, a, b, [&](double s) { return dens(s) * l0(s); });
      E_[k] = integrate(k, a, b, [&](double s) { return dens(s) * l1(s); });
      B_[k] = integrate(k, a, b, [&](double s) { return s > 0.0 ? dens(s) * l0(s) * tail(s) : 0.0; });
      C_[k] = integrate(k, a, b, [&](double s) { return s > 0.0 ? dens(s) * l1(s) * tail(s) : 0.0; });
    }
  }

  const GridPtr& grid() const { return grid_; }
  double m() const { return m_; }
  double T() const { return T_; }

  /// One application of the integral operator: returns beta^m + K[V].
  std::vector<double> apply(const std::vector<double>& V, double beta_m) const {
    const std::size_t n = V.size();
    std::vector<double> out(n);
    out[0] = beta_m;
    double J = 0.0;
    double g0 = std::pow(std::max(V[0], 0.0), 1.0 / m_);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double g1 = std::pow(std::max(V[k + 1], 0.0), 1.0 / m_);
      out[k + 1] = out[k] + J * A_[k] + scale_ * (g0 * B_[k] + g1 * C_[k]);
      J += scale_ * (g0 * D_[k] + g1 * E_[k]);
      g0 = g1;
    }
    return out;
  }

 private:
  template <class F>
  static double integrate(std::size_t k, double a, double b, F&& f) {
    double err = 0.0;
    double l1 = 0.0;
    double val = 0.0;
    if (k == 0) {
      // endpoint singularity at the origin when gamma > 1
      thread_local boost::math::quadrature::tanh_sinh<double> ts;
      val = ts.integrate(f, a, b, 1e-10, &err, &l1);
    } else {
      val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-9, &err, &l1);
    }
    // both error estimates overshoot by orders of magnitude on tiny cells
    if (!std::isfinite(val) || err > 1e-4 * std::max(std::abs(l1), 1e-300)) {
      std::ostringstream msg;
      msg << "Picard kernel moment did not converge on [" << a << ", " << b << "], error " << err;
      throw NumericError(msg.str());
    }
    return val;
  }

  GridPtr grid_;
  double m_;
  double T_;
  double scale_ = 0.0;
  std::vector<double> A_, B_, C_, D_, E_;
};

struct ShootingOptions {
  double tol = 1e-10;
  int max_iters = 10000;
};

/// Radial profile W_beta of Delta(W^m) = rho W / (T(m-1)) with W(0) = beta.
struct EllipticProfile {
  double beta = 0.0;
  double T = 0.0;
  double m = 0.0;
  GridFunction V;  // W^m
  int picard_iters = 0;
  /// sup |V - beta^m - K[V]| / (1 + sup V) at the returned iterate.
  double residual = 0.0;
  /// Least-squares d log V / d log y over the last decade of nodes.
  double asymptotic_slope = 0.0;

  GridFunction W() const {
    GridFunction w = V;
    for (double& v : w.values) v = std::pow(v, 1.0 / m);
    return w;
  }
};

/// Least-squares slope of log v against log y over nodes with y in [a, b].
inline double loglog_slope(const GridFunction& v, double a, double b) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double y = v.radius(i);
    if (y < a || y > b || !(v[i] > 0.0)) continue;
    const double lx = std::log(y);
    const double ly = std::log(v[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw DomainError("loglog_slope: fewer than two nodes in the window");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline EllipticProfile shoot_profile(const PicardKernel& kernel, double beta,
                                     const ShootingOptions& opts = {}) {
  if (!(beta > 0.0)) throw ConfigError("profile center value beta must be positive");
  const GridPtr& grid = kernel.grid();
  const double m = kernel.m();
  const double beta_m = std::pow(beta, m);
  std::vector<double> V(grid->size(), beta_m);
  EllipticProfile prof;
  prof.beta = beta;
  prof.T = kernel.T();
  prof.m = m;
  bool converged = false;
  for (int it = 1; it <= opts.max_iters; ++it) {
    std::vector<double> next = kernel.apply(V, beta_m);
    double change = 0.0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) {
      change = std::max(change, std::abs(next[i] - V[i]));
      vmax = std::max(vmax, next[i]);
    }
    if (!std::isfinite(vmax)) {
      throw NumericError("profile overflowed in the far field; reduce R_max");
    }
    V = std::move(next);
    prof.picard_iters = it;
    if (change <= opts.tol * (1.0 + vmax)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericError("Picard iteration did not converge within " +
                       std::to_string(opts.max_iters) + " iterations");
  }
  const std::vector<double> image = kernel.apply(V, beta_m);
  double res = 0.0;
  double vmax = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    res = std::max(res, std::abs(image[i] - V[i]));
    vmax = std::max(vmax, V[i]);
  }
  prof.residual = res / (1.0 + vmax);
  prof.V = GridFunction(grid, std::move(V));
  prof.asymptotic_slope = loglog_slope(prof.V, 0.1 * grid->r_max(), grid->r_max());
  return prof;
}

inline EllipticProfile shoot_profile(const ProblemParams& params, double beta, double T,
                                     GridPtr grid, const ShootingOptions& opts = {}) {
  if (grid->N() != params.N()) throw ConfigError("grid dimension differs from problem N");
  const PicardKernel kernel(std::move(grid), params.m(), T);
  return shoot_profile(kernel, beta, opts);
}

/// Flux-form defect of (y^{N-1} V')' = y^{N-1} rho V^{1/m} / (T(m-1)) at
/// interior nodes, relative to the local source. Second order on smooth
/// grids; does not vanish at the discrete fixed point.
inline double profile_defect(const EllipticProfile& prof) {
  const RadialGrid& g = *prof.V.grid;
  const auto& y = g.nodes();
  const auto& e = g.cv_edges();
  const double sigma = unit_sphere_area(g.N());
  const double s = 1.0 / (prof.T * (prof.m - 1.0));
  const int N = g.N();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double fr = std::pow(e[i + 1], N - 1) * (prof.V[i + 1] - prof.V[i]) / (y[i + 1] - y[i]);
    const double fl = std::pow(e[i], N - 1) * (prof.V[i] - prof.V[i - 1]) / (y[i] - y[i - 1]);
    const double src = s * std::pow(prof.V[i], 1.0 / prof.m) * g.cv_mass()[i] / sigma;
    worst = std::max(worst, std::abs(fr - fl - src) / src);
  }
  return worst;
}

/// U_beta(y,t) = (1 - t/T)^{-1/(m-1)} W_beta(y).
inline GridFunction separable_solution(const EllipticProfile& prof, double t) {
  if (!(t < prof.T)) throw DomainError("separable solution evaluated at or beyond T");
  const double f = std::pow(1.0 - t / prof.T, -1.0 / (prof.m - 1.0));
  GridFunction u = prof.W();
  for (double& v : u.values) v *= f;
  return u;
}

inline void write_profile_csv(const std::string& path, const EllipticProfile& prof) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << "radius,W,V\n" << std::setprecision(17);
  for (std::size_t i = 0; i < prof.V.size(); ++i) {
    os << prof.V.radius(i) << ',' << std::pow(prof.V[i], 1.0 / prof.m) << ',' << prof.V[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Supersolution barrier A (1 - t/S)^{-1/(m-1)} (1 + y^2)^{(2-gamma)/(2(m-1))}
// ---------------------------------------------------------------------------

struct Barrier {
  double A = 0.0;
  double S = 0.0;
  double m = 2.0;
  double gamma = 0.0;

  double value(double y, double t) const {
    if (!(t < S)) throw DomainError("barrier evaluated at or beyond its horizon S");
    return A * std::pow(1.0 - t / S, -1.0 / (m - 1.0)) *
           std::pow(1.0 + y * y, (2.0 - gamma) / (2.0 * (m - 1.0)));
  }
  GridFunction sample(GridPtr grid, double t) const {
    return GridFunction::sample(std::move(grid), [&](double y) { return value(y, t); });
  }
};

inline double barrier_value(const Barrier& b, double y, double t) { return b.value(y, t); }

namespace detail {
/// Delta(ubar^m) / (A^m (1-t/S)^{-m/(m-1)}) and rho ubar_t / (A (1-t/S)^{-m/(m-1)} / ((m-1)S)).
inline double barrier_laplacian_shape(double y, int N, double m, double gamma) {
  const double s = y * y / (1.0 + y * y);
  return (2.0 - gamma) * m / (m - 1.0) * (N + (2.0 - gamma * m) / (m - 1.0) * s) *
         std::pow(1.0 + y * y, (2.0 - gamma * m) / (2.0 * (m - 1.0)));
}
}  // namespace detail

/// Largest C (times 0.99) such that S = C / A^{m-1} makes the barrier a
/// supersolution rho ubar_t >= Delta(ubar^m) at every weight probe radius.
inline double barrier_constant(const ProblemParams& params) {
  const double m = params.m();
  const double g = params.gamma();
  double best = std::numeric_limits<double>::infinity();
  for (double y : WeightSpec::probe_radii()) {
    const double lhs_shape = params.weight()(y) * std::pow(1.0 + y * y, (2.0 - g) / (2.0 * (m - 1.0))) / (m - 1.0);
    const double rhs_shape = detail::barrier_laplacian_shape(y, params.N(), m, g);
    best = std::min(best, lhs_shape / rhs_shape);
  }
  return 0.99 * best;
}

/// Checks rho ubar_t >= Delta(ubar^m) at the probe radii and times t in [0, S).
inline bool barrier_is_supersolution(const Barrier& b, const ProblemParams& params) {
  const double m = b.m;
  for (double y : WeightSpec::probe_radii()) {
    for (double frac : {0.0, 0.5, 0.9}) {
      const double t = frac * b.S;
      const double tau = std::pow(1.0 - t / b.S, -m / (m - 1.0));
      const double ut = b.A / ((m - 1.0) * b.S) * tau *
                        std::pow(1.0 + y * y, (2.0 - b.gamma) / (2.0 * (m - 1.0)));
      const double lap = std::pow(b.A, m) * tau * detail::barrier_laplacian_shape(y, params.N(), m, b.gamma);
      if (params.weight()(y) * ut < lap * (1.0 - 1e-12)) return false;
    }
  }
  return true;
}

/// A = kappa_r ||u0||_{inf,r} with kappa_r = r^{(2-gamma)/(m-1)}, which makes
/// |u0(y)| <= A (1+y^2)^{(2-gamma)/(2(m-1))} for every node; S = C / A^{m-1}.
/// A zero datum gets a minimal positive amplitude.
inline Barrier calibrate_barrier(const GridFunction& u0, const ProblemParams& params, double r,
                                 double C = -1.0) {
  const NormReport n = norm_inf_r(u0, params, r);
  if (!std::isfinite(n.value)) throw DomainError("datum has infinite ||.||_{inf,r}");
  if (C <= 0.0) C = barrier_constant(params);
  Barrier b;
  b.m = params.m();
  b.gamma = params.gamma();
  const double kappa_r = std::pow(r, params.critical_rate());
  b.A = std::max(kappa_r * n.value, 1e-12);
  b.S = C / std::pow(b.A, b.m - 1.0);
  if (!barrier_is_supersolution(b, params)) {
    throw NumericError("calibrated barrier fails the supersolution inequality");
  }
  for (std::size_t i = 0; i < u0.size(); ++i) {
    if (std::abs(u0[i]) > b.value(u0.radius(i), 0.0) * (1.0 + 1e-12)) {
      throw NumericError("calibrated barrier does not dominate the datum");
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

/// c1 (c2 - c3 y^{2-gamma})_+^{1/(m-1)}, compactly supported on
/// y <= (c2/c3)^{1/(2-gamma)}.
inline GridFunction compact_profile(GridPtr grid, const ProblemParams& params, double c1, double c2,
                                    double c3) {
  if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw ConfigError("compact profile needs c1, c2, c3 > 0");
  const double g = params.gamma();
  const double m = params.m();
  return GridFunction::sample(std::move(grid), [&](double y) {
    const double base = c2 - c3 * std::pow(y, 2.0 - g);
    return base > 0.0 ? c1 * std::pow(base, 1.0 / (m - 1.0)) : 0.0;
  });
}

inline double compact_support_edge(const ProblemParams& params, double c2, double c3) {
  return std::pow(c2 / c3, 1.0 / (2.0 - params.gamma()));
}

}  // namespace wpme
