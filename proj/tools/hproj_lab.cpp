#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "hproj/errors.hpp"
#include "hproj/experiments.hpp"

using namespace hproj;

namespace {

void print_registry() {
  for (const auto& e : experiment_registry())
    std::printf("%-22s %s\n%-22s   [%s]\n", e.name.c_str(), e.description.c_str(), "", e.anchor.c_str());
}

int run(const std::string& config, const std::string& out, const std::string& only, bool seed_set,
        std::uint64_t seed, bool parallel) {
  RunConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (!out.empty()) cfg.out_dir = out;
  if (seed_set) cfg.seed = seed;
  cfg.parallel = cfg.parallel || parallel;

  SuiteResult s;
  auto t0 = std::chrono::steady_clock::now();
  try {
    s = run_suite(cfg, only);
    write_outputs(s, cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : s.results) {
    std::printf("%-5s %s\n", r.passed ? "ok" : "FAIL", r.name.c_str());
    if (!r.error.empty()) std::printf("      error: %s\n", r.error.c_str());
    for (const auto& c : r.checks)
      if (!c.passed)
        std::printf("      %s = %.6g (want %s %.6g)\n", c.name.c_str(), c.value, c.op.c_str(), c.threshold);
  }
  std::printf("%zu experiments in %.1f s, reports in %s\n", s.results.size(), secs, cfg.out_dir.c_str());
  if (!s.all_passed) {
    for (const auto& r : s.results)
      if (!r.passed) std::fprintf(stderr, "failed: %s\n", r.name.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"h-projective geometry verification lab"};
  app.require_subcommand(0, 1);
  bool list_flag = false;
  app.add_flag("--list", list_flag, "list registered experiments");

  auto* run_cmd = app.add_subcommand("run", "run experiments from a JSON config");
  std::string config, out, only;
  std::uint64_t seed = 0;
  bool parallel = false;
  run_cmd->add_option("--config", config, "config file")->required();
  run_cmd->add_option("--out", out, "output directory (overrides out_dir)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "RNG seed (overrides seed)");
  run_cmd->add_option("--only", only, "run a single experiment");
  run_cmd->add_flag("--parallel", parallel, "point-level parallelism");

  auto* list_cmd = app.add_subcommand("list", "list registered experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (list_flag || list_cmd->parsed()) {
    print_registry();
    return 0;
  }
  if (run_cmd->parsed()) return run(config, out, only, seed_opt->count() > 0, seed, parallel);
  std::cout << app.help();
  return 2;
}
