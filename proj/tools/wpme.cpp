#include <iomanip>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "wpme/harness.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  std::uint64_t seed = wpme::RunContext{}.seed;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("-c,--config", c.config, "INI configuration file");
  if (need_config) opt->required();
  cmd->add_option("-o,--out", c.out, "output directory (overrides WPME_OUT_DIR and [output] dir)");
  cmd->add_option("-j,--threads", c.threads, "worker threads (0 = hardware concurrency)");
  cmd->add_option("--seed", c.seed, "master RNG seed");
}

wpme::RunContext context(const Common& c, const wpme::ExperimentConfig& cfg) {
  wpme::RunContext ctx;
  ctx.seed = c.seed;
  ctx.threads = c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  ctx.out_dir = wpme::resolve_out_dir(c.out, cfg.out_dir);
  return ctx;
}

wpme::ExperimentConfig config_for(const Common& c, const std::string& name) {
  wpme::ExperimentConfig base = name.empty() ? wpme::ExperimentConfig{} : wpme::default_config(name);
  return c.config.empty() ? base : wpme::load_config(c.config, base);
}

int print_report(const wpme::ExperimentReport& rep) {
  for (const auto& a : rep.assertions) {
    std::cout << (a.pass ? "PASS " : "FAIL ") << rep.experiment << '.' << a.name << "  measured="
              << std::setprecision(6) << a.measured << "  bounds=[" << a.lower << ", " << a.upper << "]\n";
  }
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial finite-volume lab for the weighted porous medium equation"};
  app.require_subcommand(0, 1);

  Common solve_o, profile_o, norms_o, exp_o, cal_o;
  auto* solve = app.add_subcommand("solve", "integrate one configured problem");
  add_common(solve, solve_o, true);
  auto* profile = app.add_subcommand("profile", "shoot one elliptic profile W_beta");
  add_common(profile, profile_o, true);
  auto* norms = app.add_subcommand("norms", "evaluate every norm of the configured datum");
  add_common(norms, norms_o, true);
  auto* experiment = app.add_subcommand("experiment", "run a named experiment or 'all'");
  add_common(experiment, exp_o, false);
  std::string exp_name;
  experiment->add_option("name", exp_name, "experiment name or 'all'")->required();
  auto* calibrate = app.add_subcommand("calibrate", "bracket the existence-time constant C1");
  add_common(calibrate, cal_o, true);
  bool list = false;
  app.add_flag("--list", list, "list experiment names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list) {
      for (const auto& n : wpme::experiment_names()) std::cout << n << '\n';
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }
    if (*solve) {
      const auto cfg = config_for(solve_o, "");
      const auto j = wpme::run_solve(cfg, context(solve_o, cfg));
      std::cout << std::setw(2) << j << '\n';
      return 0;
    }
    if (*profile) {
      auto cfg = config_for(profile_o, "");
      const auto j = wpme::run_profile(cfg, context(profile_o, cfg));
      std::cout << std::setw(2) << j << '\n';
      return 0;
    }
    if (*norms) {
      const auto cfg = config_for(norms_o, "");
      std::cout << std::setw(2) << wpme::run_norms(cfg) << '\n';
      return 0;
    }
    if (*calibrate) {
      const auto cfg = config_for(cal_o, "blowup");
      const auto j = wpme::run_calibrate(cfg, context(cal_o, cfg));
      std::cout << std::setw(2) << j << '\n';
      return 0;
    }
    if (*experiment) {
      std::vector<std::string> names;
      if (exp_name == "all") {
        if (!exp_o.config.empty()) throw wpme::ConfigError("--config applies to a single experiment");
        names = wpme::experiment_names();
      } else {
        names = {exp_name};
      }
      int status = 0;
      for (const auto& n : names) {
        const auto cfg = config_for(exp_o, n);
        const auto rep = wpme::run_experiment(n, cfg, context(exp_o, cfg));
        status = std::max(status, print_report(rep));
      }
      return status;
    }
  } catch (const wpme::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const wpme::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const wpme::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
