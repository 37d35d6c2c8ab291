#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpme/grid.hpp"

using namespace wpme;

namespace {
const ProblemParams kP(3, 2.0, WeightSpec::pure_power(1.0));
}

TEST(Grid, GeometricNodes) {
  const GridPtr g = make_grid(kP, 10.0, 100, 1.02);
  EXPECT_EQ(g->size(), 101u);
  EXPECT_DOUBLE_EQ(g->node(0), 0.0);
  EXPECT_DOUBLE_EQ(g->r_max(), 10.0);
  for (std::size_t i = 2; i < g->size() - 1; ++i) {
    EXPECT_NEAR((g->node(i + 1) - g->node(i)) / (g->node(i) - g->node(i - 1)), 1.02, 1e-9);
  }
}

TEST(Grid, GradedNodes) {
  const GridPtr g = make_graded_grid(kP, 50.0, 100, 2.0);
  EXPECT_NEAR(g->node(10), 50.0 * 0.01, 1e-14);
  EXPECT_NEAR(g->node(50), 12.5, 1e-12);
  EXPECT_THROW(make_graded_grid(kP, 50.0, 100, 0.5), ConfigError);
  EXPECT_THROW(make_graded_grid(kP, 50.0, 8), ConfigError);
}

TEST(Grid, TotalMassIsExact) {
  for (const GridPtr& g : {make_grid(kP, 7.0, 64), make_graded_grid(kP, 7.0, 64)}) {
    double sum = 0.0;
    for (double m : g->cv_mass()) sum += m;
    EXPECT_NEAR(sum, 2.0 * oracle::kPi * 49.0, 1e-10);
    EXPECT_NEAR(g->cumulative_mass().back(), sum, 1e-10);
  }
}

TEST(Grid, LumpedIntegralOfConstantIsExactAtAnyRadius) {
  const GridPtr g = make_grid(kP, 5.0, 40, 1.05);
  const std::vector<double> ones(g->size(), 1.0);
  for (double R : {0.0, 0.013, 0.9, 2.5, 4.99, 5.0}) {
    EXPECT_NEAR(integrate_lumped(*g, ones, R), 2.0 * oracle::kPi * R * R, 1e-10);
  }
  EXPECT_THROW(integrate_lumped(*g, ones, 6.0), DomainError);
}

TEST(Grid, LumpedIntegralSecondOrder) {
  // int_{B_R} y rho dx = 4 pi R^3 / 3
  double prev = 0.0;
  for (int M : {50, 100, 200}) {
    const GridPtr g = make_grid(kP, 2.0, M);
    const auto f = GridFunction::sample(g, [](double y) { return y; });
    const double err = std::abs(integrate_weighted(f, 2.0) - 4.0 * oracle::kPi * 8.0 / 3.0);
    if (prev > 0.0) EXPECT_GT(prev / err, 3.5);
    prev = err;
  }
}

TEST(Grid, DistanceAndNorm) {
  const GridPtr g = make_grid(kP, 3.0, 30);
  const auto a = GridFunction::sample(g, [](double y) { return y; });
  const auto b = GridFunction::zeros(g);
  EXPECT_DOUBLE_EQ(l1_rho_distance(a, b), l1_rho(a));
  EXPECT_THROW(GridFunction(g, std::vector<double>(3, 0.0)), ConfigError);
}

TEST(Grid, CsvRoundTrip) {
  const GridPtr g = make_graded_grid(kP, 4.0, 32);
  const auto f = GridFunction::sample(g, [](double y) { return std::sin(y) + 2.0; });
  const auto path = std::filesystem::temp_directory_path() / "wpme_grid_roundtrip.csv";
  write_csv(path.string(), f);
  const GridFunction h = read_csv(path.string(), g);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(h[i], f[i], 1e-14);
  const GridPtr wider = make_grid(kP, 8.0, 32);
  EXPECT_THROW(read_csv(path.string(), wider), ConfigError);
  std::filesystem::remove(path);
}
