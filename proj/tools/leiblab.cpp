// leiblab: command-line front end for the experiment runner.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "leiblab/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<unsigned long long> seed;
  int jobs = 1;
};

void add_flags(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
  sub->add_option("--out", opt.out, "output directory (LEIBLAB_OUT overrides)");
  sub->add_option("--seed", opt.seed, "seed recorded in outputs and used for sampling");
  sub->add_option("--jobs", opt.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the doubly nonlinear diffusion d_t u = Delta_p u^q"};
  app.require_subcommand(1);
  Options opt;
  const char* names[] = {"simulate", "fit", "barenblatt", "verify", "constants", "sobolev", "sweep"};
  for (const char* name : names) add_flags(app.add_subcommand(name), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    leiblab::ExperimentConfig cfg = leiblab::load_config(opt.config);
    cfg.kind = leiblab::parse_kind(command);
    if (opt.seed) cfg.seed = *opt.seed;
    std::string out = opt.out.empty() ? cfg.output : opt.out;
    if (const char* env = std::getenv("LEIBLAB_OUT"); env && *env) out = env;
    const leiblab::RunResult r = leiblab::run_experiment(cfg, out, opt.jobs);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << r.out.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << leiblab::error_json(e) << "\n";
    return 2;
  }
  return 0;
}
