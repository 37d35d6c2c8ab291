#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wpme/solver.hpp"

using namespace wpme;

namespace {

const ProblemParams kP(3, 2.0, WeightSpec::pure_power(1.0));

GridPtr small_grid() {
  static const GridPtr g = make_graded_grid(kP, 10.0, 80);
  return g;
}

GridFunction bumps(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> A(lo, hi), C(0.0, 4.0), W(0.5, 2.5);
  const double a = A(rng), c = C(rng), w = W(rng), a2 = A(rng), c2 = C(rng);
  return GridFunction::sample(small_grid(), [&](double y) {
    auto bump = [&](double amp, double cen) {
      const double z = (y - cen) / w;
      return std::abs(z) < 1.0 ? amp * (1 - z * z) * (1 - z * z) : 0.0;
    };
    return bump(a, c) + bump(a2, c2);
  });
}

SolverOptions fixed(double dt) {
  SolverOptions o;
  o.dt_init = dt;
  o.controller.fixed_dt = true;
  o.newton_tol = 1e-13;
  o.output_count = 5;
  return o;
}

}  // namespace

TEST(Thomas, MatchesDenseSolve) {
  std::vector<double> lo{0, -1, -1, -1}, d{4, 4, 4, 4}, up{-1, -1, -1, 0}, rhs{1, 2, 3, 4};
  const auto L = lo, D = d, U = up, R = rhs;
  detail::thomas(lo, d, up, rhs);
  for (std::size_t i = 0; i < 4; ++i) {
    double row = D[i] * rhs[i];
    if (i > 0) row += L[i] * rhs[i - 1];
    if (i < 3) row += U[i] * rhs[i + 1];
    EXPECT_NEAR(row, R[i], 1e-14);
  }
}

TEST(Step, ConstantAndZeroStatesAreStationary) {
  for (double c : {0.0, 2.5}) {
    const GridFunction u = GridFunction::sample(small_grid(), [c](double) { return c; });
    const GridFunction v = step_implicit(u, 0.1, 0.1, BoundaryCondition::zero_flux(), kP);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(v[i], c, 1e-12);
  }
}

TEST(Solve, StructuralPropertiesOnRandomPairs) {
  std::mt19937_64 rng(42);
  const SolverOptions o = fixed(5e-3);
  for (int k = 0; k < 6; ++k) {
    const GridFunction a = bumps(rng, -1.0, 2.0);
    const GridFunction b = bumps(rng, -1.0, 2.0);
    GridFunction c = a;
    const GridFunction d = bumps(rng, 0.0, 1.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += d[i];
    const Trajectory ta = solve(kP, a, 0.2, o), tb = solve(kP, b, 0.2, o), tc = solve(kP, c, 0.2, o);
    const double d0 = l1_rho_distance(a, b);
    double m0 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m0 += a[i] * small_grid()->cv_mass()[i];
    for (std::size_t s = 0; s < ta.snapshots.size(); ++s) {
      EXPECT_LE(l1_rho_distance(ta.snapshots[s], tb.snapshots[s]), d0 * (1.0 + 1e-9));
      EXPECT_LE(ta.snapshots[s].max_abs(), a.max_abs() * (1.0 + 1e-12));
      double mass = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LE(ta.snapshots[s][i], tc.snapshots[s][i] + 1e-12);
        mass += ta.snapshots[s][i] * small_grid()->cv_mass()[i];
      }
      EXPECT_NEAR(mass, m0, 1e-10 * l1_rho(a));
    }
  }
}

TEST(Solve, ExplicitFamilyConverges) {
  const ExplicitFamily fam(kP, 1.0, 1.0 / 6.0);
  const GridPtr g = make_graded_grid(kP, 20.0, 100);
  SolverOptions o = fixed(1e-3);
  o.bc = BoundaryCondition::from_family(fam);
  o.output_times = {0.2};
  const Trajectory tr = solve(kP, fam.sample(g, 0.0), 0.2, o);
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    err = std::max(err, std::abs(tr.final_state[i] / fam.value(g->node(i), 0.2) - 1.0));
  }
  EXPECT_LT(err, 1e-2);
  EXPECT_DOUBLE_EQ(tr.t_reached, 0.2);
}

TEST(Solve, SeparableDataBlowUpAtHorizon) {
  const GridPtr g = make_graded_grid(kP, 10.0, 100);
  const EllipticProfile p = shoot_profile(kP, 1.0, 1.0, g);
  SolverOptions o;
  o.bc = BoundaryCondition::separable(p);
  o.blowup_factor = 1e4;
  o.output_count = 2;
  const Trajectory tr = solve(kP, p.W(), 2.0, o);
  ASSERT_TRUE(tr.blowup.has_value());
  EXPECT_NEAR(tr.blowup->T_fit, 1.0, 0.02);
  EXPECT_LT(tr.t_reached, 1.0);
  EXPECT_EQ(tr.events.back().kind, "blowup");
}

TEST(Solve, NewtonFailureBelowMinimumStepThrows) {
  std::mt19937_64 rng(1);
  SolverOptions o;
  o.newton_max_iters = 1;
  o.dt_init = 1.0;
  o.dt_min = 0.4;
  EXPECT_THROW(solve(kP, bumps(rng, 1.0, 5.0), 1.0, o), NumericError);
}

TEST(Solve, RejectsBadInput) {
  GridFunction u = GridFunction::zeros(small_grid());
  u[3] = std::nan("");
  EXPECT_THROW(solve(kP, u, 1.0, SolverOptions{}), DomainError);
  EXPECT_THROW(solve(kP, GridFunction::zeros(small_grid()), 0.0, SolverOptions{}), DomainError);
  const ProblemParams p4(4, 2.0, WeightSpec::pure_power(1.0));
  EXPECT_THROW(solve(p4, GridFunction::zeros(small_grid()), 1.0, SolverOptions{}), ConfigError);
  EXPECT_THROW(bc_value(BoundaryCondition::separable(1.0, 1.0, 2.0), 1.0, 10.0), DomainError);
}

TEST(Blowup, SyntheticTraceRecoversHorizon) {
  for (double m : {2.0, 3.0}) {
    std::vector<double> t, s;
    for (int k = 0; k < 60; ++k) {
      t.push_back(0.7 * (1.0 - std::pow(0.85, k)));
      s.push_back(std::pow(1.0 - t.back() / 0.7, -1.0 / (m - 1.0)));
    }
    const auto fit = detect_blowup(t, s, m, 10.0);
    ASSERT_TRUE(fit.has_value());
    EXPECT_NEAR(fit->T_fit, 0.7, 1e-10);
    EXPECT_LT(fit->rms_rel, 1e-8);
  }
  EXPECT_FALSE(detect_blowup({0, 1, 2}, {1, 1, 1}, 2.0, 0.5).has_value());
  EXPECT_FALSE(detect_blowup({0, 1, 2}, {1, 2, 3}, 2.0, 10.0).has_value());
  EXPECT_THROW(detect_blowup({0, 1}, {1, 2}, 2.0, 0.0), DomainError);
}

TEST(Schedule, LogSpacing) {
  const auto s = log_schedule(2.0, 4);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_NEAR(s.front(), 2e-3, 1e-15);
  EXPECT_DOUBLE_EQ(s.back(), 2.0);
  EXPECT_NEAR(s[2] / s[1], s[1] / s[0], 1e-12);
}

TEST(Datum, Preparations) {
  const GridFunction u = GridFunction::sample(small_grid(), [](double y) { return 3.0 * y; });
  const GridFunction z = prepare_datum(u, 5.0, DatumPreparation::zero_extension);
  const GridFunction c = prepare_datum(u, 5.0, DatumPreparation::clamp_only);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_EQ(c[i], std::min(u[i], 5.0));
    EXPECT_EQ(z[i], u.radius(i) < 5.0 ? std::min(u[i], 5.0) : 0.0);
  }
}
