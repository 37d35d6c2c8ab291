#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpme/norms.hpp"

using namespace wpme;

namespace {

const ProblemParams kP(3, 2.0, WeightSpec::pure_power(1.0));

GridPtr grid() {
  static const GridPtr g = make_graded_grid(kP, 400.0, 800);
  return g;
}

GridFunction power(double s) {
  return GridFunction::sample(grid(), [s](double y) { return std::pow(y, s); });
}

GridFunction random_datum(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double a = 4.0 * U(rng) - 2.0, c = 30.0 * U(rng), w = 0.5 + 5.0 * U(rng);
  const double b = U(rng) - 0.3, s = U(rng);
  return GridFunction::sample(grid(), [&](double y) {
    const double z = (y - c) / w;
    return (std::abs(z) < 1.0 ? a * (1 - z * z) * (1 - z * z) : 0.0) + b * std::pow(y, s);
  });
}

}  // namespace

class PowerNorms : public ::testing::TestWithParam<double> {};

TEST_P(PowerNorms, ClosedForms) {
  const double s = GetParam();
  const GridFunction f = power(s);
  for (double r : {1.0, 3.0}) {
    EXPECT_NEAR(norm_1r(f, kP, r).value / (4.0 * oracle::kPi * std::pow(r, s - 1.0) / (s + 2.0)), 1.0, 2e-3);
    EXPECT_NEAR(norm_pr(f, kP, 2.0, r).value / (std::sqrt(4.0 * oracle::kPi / (2.0 * s + 2.0)) * std::pow(r, s - 1.0)),
                1.0, 2e-3);
    // the probe at R = r only sees nodes <= r
    EXPECT_NEAR(norm_inf_r(f, kP, r).value / std::pow(r, s - 1.0), 1.0, 1e-2);
  }
}

INSTANTIATE_TEST_SUITE_P(Exponents, PowerNorms, ::testing::Values(0.0, 0.5, 1.0));

TEST(Norms, EquivalenceAndMonotonicityOnRandomData) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 40; ++k) {
    const GridFunction f = random_datum(rng);
    for (double p : {1.0, 2.0, 3.5}) {
      const double a = kP.norm_exponent(p);
      const double cut = cutoff_norm_pr(f, kP, p, 1.0).value;
      EXPECT_LE(norm_pr(f, kP, p, 1.0, 200.0).value, cut * (1.0 + 1e-12));
      EXPECT_LE(cut, std::pow(2.0, a) * norm_pr(f, kP, p, 1.0).value * (1.0 + 1e-12));
      EXPECT_LE(norm_pr(f, kP, p, 2.0).value, norm_pr(f, kP, p, 1.0).value * (1.0 + 1e-12));
    }
    EXPECT_LE(norm_inf_r(f, kP, 5.0).value, norm_inf_r(f, kP, 1.0).value);
  }
}

TEST(Norms, HomogeneityAndTriangle) {
  std::mt19937_64 rng(3);
  const GridFunction f = random_datum(rng), g = random_datum(rng);
  GridFunction sum = f, scaled = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sum[i] += g[i];
    scaled[i] *= -3.0;
  }
  EXPECT_NEAR(norm_1r(scaled, kP, 1.0).value, 3.0 * norm_1r(f, kP, 1.0).value, 1e-12);
  EXPECT_LE(norm_1r(sum, kP, 1.0).value, norm_1r(f, kP, 1.0).value + norm_1r(g, kP, 1.0).value + 1e-12);
}

TEST(Norms, InvalidArguments) {
  const GridFunction f = power(0.5);
  EXPECT_THROW(norm_1r(f, kP, 0.5), DomainError);
  EXPECT_THROW(norm_1r(f, kP, 500.0), DomainError);
  EXPECT_THROW(norm_pr(f, kP, 0.5, 1.0), DomainError);
  EXPECT_THROW(embedding_bound(f, kP, 1.0, 1.0), DomainError);
  const ProblemParams other(4, 2.0, WeightSpec::pure_power(1.0));
  EXPECT_THROW(norm_1r(f, other, 1.0), ConfigError);
}

TEST(Norms, TruncationNoteFlagsGrowthBeyondCriticalRate) {
  EXPECT_TRUE(norm_1r(power(1.5), kP, 1.0).truncation_note);
  EXPECT_FALSE(norm_1r(power(0.5), kP, 1.0).truncation_note);
}

TEST(Tail, ClassifiesX0) {
  const TailReport one = ell_tail(power(0.0), kP);
  EXPECT_TRUE(one.in_X0);
  const TailReport crit = ell_tail(power(1.0), kP);
  EXPECT_FALSE(crit.in_X0);
  EXPECT_NEAR(crit.limit_estimate, 4.0 * oracle::kPi / 3.0, 5e-3);
  EXPECT_THROW(ell_tail(power(0.0), kP, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST(Tail, TruncationDichotomy) {
  auto dist = [](const GridFunction& f, double n) {
    GridFunction d = f;
    const GridFunction fn = truncate_datum(f, n);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= fn[i];
    return norm_1r(d, kP, 1.0).value;
  };
  // f = 1: distance sup_R R^{-3} 2 pi (R^2 - n^2) = 4 pi / (3 sqrt(3) n)
  for (double n : {10.0, 20.0, 40.0}) {
    EXPECT_NEAR(dist(power(0.0), n) / (4.0 * oracle::kPi / (3.0 * std::sqrt(3.0) * n)), 1.0, 1e-2);
    EXPECT_GT(dist(power(1.0), n), 0.95 * 4.0 * oracle::kPi / 3.0);
  }
}

TEST(Limsup, IdentityOnCriticalGrowth) {
  const GridFunction osc = GridFunction::sample(grid(), [](double y) { return y * (1.0 + 0.5 * std::sin(y)); });
  const LimsupReport r = limsup_rate(osc, kP);
  EXPECT_NEAR(r.tail_norm, 1.5, 1e-3);
  EXPECT_NEAR(r.far_ratio, 1.5, 1e-3);
}

TEST(PhiAlpha, EmbeddingSlackOnRandomData) {
  std::mt19937_64 rng(5);
  for (double alpha : {1.6, 3.0, 6.0}) {
    ASSERT_TRUE(alpha_admissible(kP, alpha));
    for (int k = 0; k < 20; ++k) EXPECT_GE(embedding_bound(random_datum(rng), kP, alpha, 1.0).slack, 0.0);
  }
  EXPECT_FALSE(alpha_admissible(kP, 1.5));
}

TEST(PhiAlpha, DistanceIsAMetric) {
  std::mt19937_64 rng(9);
  const GridFunction a = random_datum(rng), b = random_datum(rng), c = random_datum(rng);
  EXPECT_DOUBLE_EQ(phi_alpha_distance(a, a, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(phi_alpha_distance(a, b, 3.0), phi_alpha_distance(b, a, 3.0));
  EXPECT_LE(phi_alpha_distance(a, c, 3.0), phi_alpha_distance(a, b, 3.0) + phi_alpha_distance(b, c, 3.0) + 1e-12);
}

TEST(Truncate, ClampsAndCuts) {
  const GridFunction f = power(1.0);
  const GridFunction t = truncate_datum(f, 10.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.radius(i) >= 10.0) {
      EXPECT_EQ(t[i], 0.0);
    } else {
      EXPECT_EQ(t[i], std::min(f[i], 10.0));
    }
  }
  EXPECT_THROW(truncate_datum(f, 0.0), DomainError);
}
