#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "wpme/harness.hpp"

namespace {

struct Criterion {
  int id;
  const char* experiment;
  double limit_s;
  const char* what;
};

const std::vector<Criterion> kCriteria{
    {1, "explicit_convergence", 60.0, "explicit blow-up family reproduced with second/first order"},
    {2, "profile_shooting", 30.0, "elliptic profile residual, expansion, growth and ordering"},
    {3, "blowup", 300.0, "blow-up time, sandwich bounds and ell^{m-1} T stability"},
    {4, "contraction_ordering", 180.0, "contraction, ordering, L^inf bound and mass"},
    {5, "bc_monotonicity", 60.0, "t^{1/(m-1)} u nondecreasing"},
    {6, "smoothing", 180.0, "smoothing ratio bounded and stable"},
    {7, "norm_suite", 60.0, "norm closed forms, equivalence, embedding, dichotomy, identities"},
};

bool run(const Criterion& c) {
  wpme::RunContext ctx;
  ctx.threads = 1;
  if (const char* out = std::getenv("WPME_OUT_DIR"); out && *out) ctx.out_dir = out;
  const auto t0 = std::chrono::steady_clock::now();
  wpme::ExperimentReport rep;
  std::string error;
  try {
    rep = wpme::run_experiment(c.experiment, wpme::default_config(c.experiment), ctx);
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= c.limit_s;
  const bool pass = error.empty() && rep.passed() && in_time;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.experiment << ": " << c.what
            << " (" << std::fixed << std::setprecision(1) << secs << " s of " << c.limit_s << " s)\n";
  std::cout.unsetf(std::ios::fixed);
  if (!error.empty()) std::cout << "    error: " << error << '\n';
  if (!in_time) std::cout << "    runtime limit exceeded\n";
  for (const auto& a : rep.assertions) {
    if (!a.pass) {
      std::cout << "    failed " << a.name << ": measured " << std::setprecision(6) << a.measured << " outside ["
                << a.lower << ", " << a.upper << "] (" << a.property << ")\n";
    }
  }
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  bool ok = true;
  bool matched = false;
  for (const auto& c : kCriteria) {
    if (which == "all" || which == std::to_string(c.id)) {
      matched = true;
      ok = run(c) && ok;
    }
  }
  if (!matched) {
    std::cerr << "unknown criterion '" << which << "' (1-7 or all)\n";
    return 2;
  }
  return ok ? 0 : 1;
}
