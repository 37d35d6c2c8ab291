#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wpme/errors.hpp"

namespace wpme {

/// Surface area of the unit sphere in R^N.
inline double unit_sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

enum class WeightKind { pure_power, regularized_power, user_radial };

inline std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::pure_power: return "pure_power";
    case WeightKind::regularized_power: return "regularized_power";
    case WeightKind::user_radial: return "user_radial";
  }
  return "unknown";
}

/// Radial density rho(y) obeying k (1+y)^{-gamma} <= rho(y) <= K y^{-gamma}.
///
/// Three realizations are supported:
///   pure_power         rho(y) = y^{-gamma}
///   regularized_power  rho(y) = (eps^2 + y^2)^{-gamma/2}
///   user_radial        tabulated samples, log-log linear in between and
///                      power-law extrapolated from the end segments
///
/// The two-sided bound is checked on construction at 64 log-spaced radii in
/// [1e-6, 1e6]; a violation throws ConfigError.
class WeightSpec {
 public:
  static constexpr int kProbeCount = 64;
  static constexpr double kProbeMin = 1e-6;
  static constexpr double kProbeMax = 1e6;

  static WeightSpec pure_power(double gamma) {
    WeightSpec w(WeightKind::pure_power, gamma, 1.0, 1.0);
    w.check_sandwich();
    return w;
  }

  static WeightSpec regularized_power(double gamma, double eps = 0.0,
                                      double k = 1.0, double K = 1.0) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
      throw ConfigError("regularized_power: eps must be finite and >= 0");
    }
    WeightSpec w(WeightKind::regularized_power, gamma, k, K);
    w.eps_ = eps;
    w.check_sandwich();
    return w;
  }

  static WeightSpec user_radial(double gamma, double k, double K,
                                std::vector<double> radii,
                                std::vector<double> values) {
    WeightSpec w(WeightKind::user_radial, gamma, k, K);
    if (radii.size() < 2 || radii.size() != values.size()) {
      throw ConfigError("user_radial: need >= 2 samples of matching length");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(radii[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(radii[i]) ||
          !std::isfinite(values[i])) {
        throw ConfigError("user_radial: radii and values must be positive");
      }
      if (i > 0 && !(radii[i] > radii[i - 1])) {
        throw ConfigError("user_radial: radii must be strictly increasing");
      }
    }
    w.log_r_.reserve(radii.size());
    w.log_v_.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
      w.log_r_.push_back(std::log(radii[i]));
      w.log_v_.push_back(std::log(values[i]));
    }
    w.check_sandwich();
    return w;
  }

  WeightKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double k() const { return k_; }
  double K() const { return K_; }
  double eps() const { return eps_; }

  /// True when rho(y) = y^{-gamma} exactly (closed-form masses apply).
  bool is_exact_power() const {
    return kind_ == WeightKind::pure_power ||
           (kind_ == WeightKind::regularized_power && eps_ == 0.0);
  }

  /// rho(y) for y > 0. Throws DomainError at y = 0 when rho is singular there.
  double operator()(double y) const {
    if (!(y >= 0.0) || !std::isfinite(y)) {
      throw DomainError("weight evaluated at invalid radius");
    }
    if (y == 0.0 && (is_exact_power() || kind_ == WeightKind::user_radial) &&
        gamma_ > 0.0) {
      throw DomainError("weight is singular at y = 0");
    }
    switch (kind_) {
      case WeightKind::pure_power:
        return std::pow(y, -gamma_);
      case WeightKind::regularized_power:
        return std::pow(eps_ * eps_ + y * y, -0.5 * gamma_);
      case WeightKind::user_radial:
        return eval_table(y);
    }
    return 0.0;
  }

  /// Lower and upper sandwich envelopes at y > 0.
  double lower_bound(double y) const { return k_ * std::pow(1.0 + y, -gamma_); }
  double upper_bound(double y) const { return K_ * std::pow(y, -gamma_); }

  static std::vector<double> probe_radii() {
    std::vector<double> probes(kProbeCount);
    const double a = std::log(kProbeMin);
    const double b = std::log(kProbeMax);
    for (int i = 0; i < kProbeCount; ++i) {
      probes[i] = std::exp(a + (b - a) * i / (kProbeCount - 1));
    }
    return probes;
  }

  /// Throws ConfigError if the sandwich fails at any probe radius.
  void check_sandwich() const {
    for (double y : probe_radii()) {
      const double v = (*this)(y);
      const double slack = 1e-12 * v;
      if (v < lower_bound(y) - slack || v > upper_bound(y) + slack) {
        std::ostringstream msg;
        msg << "weight violates k(1+y)^-gamma <= rho <= K y^-gamma at y=" << y
            << " (rho=" << v << ", lower=" << lower_bound(y)
            << ", upper=" << upper_bound(y) << ")";
        throw ConfigError(msg.str());
      }
    }
  }

 private:
  WeightSpec(WeightKind kind, double gamma, double k, double K)
      : kind_(kind), gamma_(gamma), k_(k), K_(K) {
    if (!(gamma >= 0.0 && gamma < 2.0)) {
      throw ConfigError("weight exponent gamma must lie in [0, 2)");
    }
    if (!(k > 0.0) || !(K > 0.0) || !std::isfinite(k) || !std::isfinite(K)) {
      throw ConfigError("sandwich constants k, K must be positive");
    }
    if (K < k) {
      throw ConfigError("sandwich constants must satisfy k <= K");
    }
  }

  double eval_table(double y) const {
    const double ly = std::log(y);
    const std::size_t n = log_r_.size();
    std::size_t i = 0;
    if (ly <= log_r_.front()) {
      i = 0;
    } else if (ly >= log_r_.back()) {
      i = n - 2;
    } else {
      i = static_cast<std::size_t>(
              std::upper_bound(log_r_.begin(), log_r_.end(), ly) -
              log_r_.begin()) -
          1;
    }
    const double s = (log_v_[i + 1] - log_v_[i]) / (log_r_[i + 1] - log_r_[i]);
    return std::exp(log_v_[i] + s * (ly - log_r_[i]));
  }

  WeightKind kind_;
  double gamma_;
  double k_;
  double K_;
  double eps_ = 0.0;
  std::vector<double> log_r_;
  std::vector<double> log_v_;
};

/// Integral of rho(y) sigma_N y^{N-1} over [a, b], i.e. the rho-mass of the
/// spherical shell a <= |x| <= b.
inline double weight_cell_mass(const WeightSpec& w, int N, double a, double b) {
  if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
    throw DomainError("weight_cell_mass: need 0 <= a <= b < inf");
  }
  if (a == b) return 0.0;
  const double sigma = unit_sphere_area(N);
  if (w.is_exact_power()) {
    const double p = N - w.gamma();
    return sigma * (std::pow(b, p) - std::pow(a, p)) / p;
  }
  auto integrand = [&](double y) {
    if (y <= 0.0) return 0.0;
    return w(y) * std::pow(y, N - 1);
  };
  double err = 0.0;
  double l1 = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, a, b, 10, 1e-9, &err, &l1);
  if (!std::isfinite(val) || err > 1e-6 * std::max(l1, 1e-300)) {
    std::ostringstream msg;
    msg << "weight_cell_mass: quadrature did not converge on [" << a << ", " << b
        << "] (estimate " << val << ", error " << err << ")";
    throw NumericError(msg.str());
  }
  return sigma * val;
}

/// Exponents recurring in the smoothing and blow-up estimates.
struct Exponents {
  double lambda1;
  double theta;
  double kappa;
  double critical_rate;
};

/// Validated problem parameters: dimension, nonlinearity, weight and an
/// optional blow-up horizon used by elliptic profiles.
class ProblemParams {
 public:
  ProblemParams(int N, double m, WeightSpec weight,
                std::optional<double> horizon = std::nullopt)
      : N_(N), m_(m), weight_(std::move(weight)), horizon_(horizon) {
    if (N < 3) throw ConfigError("dimension N must be >= 3");
    if (!(m > 1.0) || !std::isfinite(m)) {
      throw ConfigError("nonlinearity exponent m must be > 1");
    }
    if (horizon_ && !(*horizon_ > 0.0 && std::isfinite(*horizon_))) {
      throw ConfigError("blow-up horizon T must be positive and finite");
    }
  }

  int N() const { return N_; }
  double m() const { return m_; }
  double gamma() const { return weight_.gamma(); }
  const WeightSpec& weight() const { return weight_; }
  std::optional<double> horizon() const { return horizon_; }

  /// (2 - gamma) / (m - 1), the borderline growth exponent.
  double critical_rate() const { return (2.0 - gamma()) / (m_ - 1.0); }

  /// Scaling exponent of the p-norms: critical_rate + (N - gamma) / p.
  /// p = infinity gives critical_rate.
  double norm_exponent(double p) const {
    if (std::isinf(p)) return critical_rate();
    return critical_rate() + (N_ - gamma()) / p;
  }

 private:
  int N_;
  double m_;
  WeightSpec weight_;
  std::optional<double> horizon_;
};

inline Exponents derive_exponents(const ProblemParams& params) {
  const double ng = params.N() - params.gamma();
  const double tg = 2.0 - params.gamma();
  const double m1 = params.m() - 1.0;
  Exponents e{};
  e.lambda1 = ng / (ng * m1 + tg);
  e.theta = tg / ng;
  e.kappa = e.lambda1 * m1;
  e.critical_rate = tg / m1;
  return e;
}

/// Guaranteed existence time C1 / norm^{m-1}; +inf for a vanishing tail norm.
inline double existence_time(double norm_1r, double m, double C1 = 1.0) {
  if (!(norm_1r >= 0.0)) throw DomainError("existence_time: norm must be >= 0");
  if (!(C1 > 0.0)) throw DomainError("existence_time: C1 must be positive");
  if (norm_1r == 0.0) return std::numeric_limits<double>::infinity();
  return C1 / std::pow(norm_1r, m - 1.0);
}

}  // namespace wpme
