#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpme/model.hpp"

using namespace wpme;

TEST(Exponents, ReferenceCase) {
  const ProblemParams p(3, 2.0, WeightSpec::pure_power(1.0));
  const Exponents e = derive_exponents(p);
  EXPECT_NEAR(e.lambda1, oracle::kLambda1, 1e-15);
  EXPECT_NEAR(e.theta, oracle::kTheta, 1e-15);
  EXPECT_NEAR(e.kappa, oracle::kKappa, 1e-15);
  EXPECT_NEAR(e.critical_rate, 1.0, 1e-15);
  EXPECT_NEAR(p.norm_exponent(1.0), 3.0, 1e-15);
}

TEST(Exponents, IdentityOverRandomTriples) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dn(3, 20);
  std::uniform_real_distribution<double> dm(1.0 + 1e-9, 8.0), dg(0.0, 1.999);
  for (int k = 0; k < 2000; ++k) {
    const ProblemParams p(dn(rng), dm(rng), WeightSpec::pure_power(dg(rng)));
    const Exponents e = derive_exponents(p);
    EXPECT_NEAR(e.theta * e.lambda1 + e.kappa, 1.0, 1e-14);
    EXPECT_GT(e.lambda1, 0.0);
  }
}

TEST(Weight, PureCellMassClosedForm) {
  const WeightSpec w = WeightSpec::pure_power(1.0);
  for (auto [a, b] : {std::pair{0.0, 1.0}, {0.3, 0.7}, {2.0, 50.0}}) {
    EXPECT_NEAR(weight_cell_mass(w, 3, a, b), 2.0 * oracle::kPi * (b * b - a * a), 1e-12 * b * b);
  }
  // gamma = 1.5, N = 4: 2 pi^2 * (b^{2.5} - a^{2.5}) / 2.5
  const WeightSpec w2 = WeightSpec::pure_power(1.5);
  EXPECT_NEAR(weight_cell_mass(w2, 4, 0.0, 2.0),
              2.0 * oracle::kPi * oracle::kPi * std::pow(2.0, 2.5) / 2.5, 1e-10);
}

TEST(Weight, RegularizedMassMatchesQuadrature) {
  const WeightSpec w = WeightSpec::regularized_power(1.0, 0.5, 0.5, 1.0);
  // (0.25 + y^2)^{-1/2}; int_0^1 4 pi y^2 (0.25 + y^2)^{-1/2} dy in closed form
  const double e2 = 0.25;
  const double exact = 4.0 * oracle::kPi * 0.5 *
                       (std::sqrt(1.0 + e2) - e2 * std::asinh(1.0 / std::sqrt(e2)));
  EXPECT_NEAR(weight_cell_mass(w, 3, 0.0, 1.0), exact, 1e-9);
}

TEST(Weight, SandwichViolationsRejected) {
  EXPECT_THROW(WeightSpec::pure_power(2.0), ConfigError);
  EXPECT_THROW(WeightSpec::pure_power(-0.1), ConfigError);
  EXPECT_THROW(WeightSpec::regularized_power(1.0, 0.5, 2.0, 1.0), ConfigError);
  EXPECT_THROW(WeightSpec::user_radial(1.0, 0.5, 1.0, {1.0}, {1.0}), ConfigError);
  EXPECT_THROW(WeightSpec::user_radial(1.0, 0.5, 1.0, {1.0, 0.5}, {1.0, 2.0}), ConfigError);
}

TEST(Weight, UserRadialPowerLawRoundTrip) {
  std::vector<double> r, v;
  for (double y = 0.01; y < 200.0; y *= 1.5) {
    r.push_back(y);
    v.push_back(0.8 / y);
  }
  const WeightSpec w = WeightSpec::user_radial(1.0, 0.5, 1.0, r, v);
  for (double y : {0.02, 1.0, 37.0, 1e3}) EXPECT_NEAR(w(y), 0.8 / y, 1e-9 / y);
}

TEST(Problem, InvalidParameters) {
  EXPECT_THROW(ProblemParams(2, 2.0, WeightSpec::pure_power(1.0)), ConfigError);
  EXPECT_THROW(ProblemParams(3, 1.0, WeightSpec::pure_power(1.0)), ConfigError);
  EXPECT_THROW(ProblemParams(3, 2.0, WeightSpec::pure_power(1.0), -1.0), ConfigError);
}

TEST(Problem, ExistenceTime) {
  EXPECT_DOUBLE_EQ(existence_time(2.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(existence_time(2.0, 3.0, 4.0), 1.0);
  EXPECT_TRUE(std::isinf(existence_time(0.0, 2.0)));
  EXPECT_THROW(existence_time(-1.0, 2.0), DomainError);
}
