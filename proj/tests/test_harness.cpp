#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "wpme/harness.hpp"

using namespace wpme;

namespace {

std::filesystem::path write_ini(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Pool, VisitsEveryIndexOnce) {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Pool, RethrowsLowestFailingIndex) {
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 13) throw NumericError("job " + std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const NumericError& e) {
    EXPECT_STREQ(e.what(), "job 7");
  }
}

TEST(Seed, DerivedStreamsDiffer) {
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
}

TEST(Config, OverlaysSectionsAndExperimentKeys) {
  const auto p = write_ini("wpme_cfg_ok.ini",
                           "[problem]\nN = 4\nm = 3\ngamma = 0.5\n"
                           "[grid]\nR_max = 30\ncells = 64\nspacing = geometric\nstretch = 1.02\n"
                           "[solver]\nt_end = 0.25\nbc = zero_flux\n"
                           "[experiment]\nspace_cells = 10 20, 40\n");
  const ExperimentConfig c = load_config(p.string(), default_config("smoothing"));
  EXPECT_EQ(c.problem.N(), 4);
  EXPECT_DOUBLE_EQ(c.problem.m(), 3.0);
  EXPECT_DOUBLE_EQ(c.problem.gamma(), 0.5);
  EXPECT_EQ(c.grid.cells, 64);
  EXPECT_EQ(c.grid.spacing, "geometric");
  EXPECT_DOUBLE_EQ(c.t_end, 0.25);
  EXPECT_EQ(c.list("space_cells", {}), (std::vector<double>{10, 20, 40}));
  EXPECT_EQ(c.datum.kind, "power");
  EXPECT_DOUBLE_EQ(c.num("missing", 1.5), 1.5);
  std::filesystem::remove(p);
}

TEST(Config, RejectsMalformedInput) {
  const auto p1 = write_ini("wpme_cfg_key.ini", "[grid]\ncels = 10\n");
  EXPECT_THROW(load_config(p1.string()), ConfigError);
  const auto p2 = write_ini("wpme_cfg_sec.ini", "[gird]\ncells = 10\n");
  EXPECT_THROW(load_config(p2.string()), ConfigError);
  const auto p3 = write_ini("wpme_cfg_val.ini", "[grid]\ncells = many\n");
  EXPECT_THROW(load_config(p3.string()), ConfigError);
  const auto p4 = write_ini("wpme_cfg_m.ini", "[problem]\nm = 1\n");
  EXPECT_THROW(load_config(p4.string()), ConfigError);
  const auto p5 = write_ini("wpme_cfg_alpha.ini", "[norms]\nalpha = 1\n");
  EXPECT_THROW(load_config(p5.string()), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/wpme.ini"), ConfigError);
  const auto p6 = write_ini("wpme_cfg_num.ini", "[experiment]\npairs = 2.5\n");
  EXPECT_THROW(load_config(p6.string()).integer("pairs", 1), ConfigError);
  for (const auto& p : {p1, p2, p3, p4, p5, p6}) std::filesystem::remove(p);
}

TEST(Config, OutputDirectoryPrecedence) {
  ::unsetenv("WPME_OUT_DIR");
  EXPECT_EQ(resolve_out_dir("", ""), "wpme_out");
  EXPECT_EQ(resolve_out_dir("", "cfg"), "cfg");
  ::setenv("WPME_OUT_DIR", "env", 1);
  EXPECT_EQ(resolve_out_dir("", "cfg"), "env");
  EXPECT_EQ(resolve_out_dir("cli", "cfg"), "cli");
  ::unsetenv("WPME_OUT_DIR");
}

TEST(Datum, BuildsEveryKind) {
  const ProblemParams P(3, 2.0, WeightSpec::pure_power(1.0));
  const GridPtr g = make_graded_grid(P, 10.0, 64);
  for (const char* kind : {"explicit", "profile", "compact", "power", "constant"}) {
    DatumSpec d;
    d.kind = kind;
    EXPECT_TRUE(build_datum(d, P, g).u0.all_finite()) << kind;
  }
  DatumSpec bad;
  bad.kind = "gaussian";
  EXPECT_THROW(build_datum(bad, P, g), ConfigError);
  DatumSpec d;
  d.kind = "compact";
  EXPECT_THROW(build_bc("separable", build_datum(d, P, g), P, 1.0), ConfigError);
  EXPECT_EQ(build_bc("barrier", build_datum(d, P, g), P, 1.0).mode, BcMode::dirichlet_barrier);
}

TEST(Report, NanFailsAndSerializesAsNull) {
  ExperimentReport r;
  r.experiment = "x";
  r.check("ok", "p", 0.5, 0.0, 1.0);
  r.check("nan", "p", std::nan(""), 0.0, 1.0);
  EXPECT_TRUE(r.get("ok").pass);
  EXPECT_FALSE(r.get("nan").pass);
  EXPECT_FALSE(r.passed());
  const json j = r.to_json();
  EXPECT_TRUE(j["assertions"][1]["measured"].is_null());
  EXPECT_FALSE(j["pass"].get<bool>());
}

TEST(Experiment, ReproducibleAcrossThreadCounts) {
  ExperimentConfig c = default_config("contraction_ordering");
  c.extra["pairs"] = "3";
  c.t_end = 0.05;
  RunContext one, many;
  many.threads = 4;
  const json a = exp_contraction_ordering(c, one).to_json();
  const json b = exp_contraction_ordering(c, many).to_json();
  EXPECT_EQ(a.dump(), b.dump());
  many.seed = 99;
  EXPECT_NE(a["measured"].dump(), exp_contraction_ordering(c, many).to_json()["measured"].dump());
}

TEST(Experiment, UnknownNameRejected) {
  EXPECT_THROW(default_config("nope"), ConfigError);
  EXPECT_THROW(run_experiment("nope", ExperimentConfig{}, RunContext{}), ConfigError);
  EXPECT_EQ(experiment_names().size(), 7u);
}

TEST(Experiment, WritesReportAndArtifacts) {
  RunContext ctx;
  ctx.out_dir = std::filesystem::temp_directory_path() / "wpme_harness_out";
  std::filesystem::remove_all(ctx.out_dir);
  const auto rep = run_experiment("bc_monotonicity", default_config("bc_monotonicity"), ctx);
  EXPECT_TRUE(rep.passed());
  std::ifstream is(ctx.out_dir / "bc_monotonicity" / "report.json");
  const json j = json::parse(is);
  EXPECT_EQ(j["experiment"], "bc_monotonicity");
  EXPECT_EQ(j["assertions"].size(), 3u);
  std::filesystem::remove_all(ctx.out_dir);
}

TEST(Commands, SolveAndNorms) {
  ExperimentConfig c;
  c.grid = {20.0, 64, "graded", 2.0, 1.0};
  c.datum.kind = "compact";
  c.t_end = 0.05;
  const json s = run_solve(c, RunContext{});
  EXPECT_DOUBLE_EQ(s["t_reached"].get<double>(), 0.05);
  EXPECT_EQ(s["bc"], "zero_flux");
  const json n = run_norms(c);
  EXPECT_TRUE(n["ell"]["in_X0"].get<bool>());
  EXPECT_GE(n["embedding"]["slack"].get<double>(), 0.0);
}
