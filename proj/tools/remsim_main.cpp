#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "remsim/config.hpp"
#include "remsim/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stochastic cavity-emitter experiment driver"};

  std::string experiment;
  std::string config_path;
  std::string out_dir = ".";
  uint64_t seed = 0;
  int workers = 0;
  bool seed_given = false;
  bool workers_given = false;
  bool paper_scale = false;
  bool with_oracle = false;

  std::vector<std::string> choices = remsim::experiment_names();
  choices.push_back("all");
  app.add_option("experiment", experiment, "which experiment to run")
      ->required()
      ->check(CLI::IsMember(choices));
  app.add_option("--config", config_path, "run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "base RNG seed (overrides [run] seed)")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", out_dir, "output directory, created if missing");
  app.add_option("--workers", workers, "worker threads (overrides [run] workers)")
      ->each([&](const std::string&) { workers_given = true; });
  app.add_flag("--paper-scale", paper_scale,
               "full-size statistics instead of the fast defaults");
  app.add_flag("--oracle", with_oracle,
               "also run the slow independent cross-checks");

  CLI11_PARSE(app, argc, argv);

  try {
    const remsim::Config cfg = remsim::Config::parse_file(config_path);
    remsim::RunOptions opt;
    opt.seed = seed_given
                   ? seed
                   : static_cast<uint64_t>(cfg.integer("run", "seed", 1));
    opt.workers = workers_given
                      ? workers
                      : static_cast<int>(cfg.integer("run", "workers", 1));
    opt.out_dir = out_dir;
    opt.paper_scale = paper_scale;
    opt.with_oracle = with_oracle;

    const auto outcome = remsim::run_experiment(experiment, cfg, opt);
    for (const auto& [key, value] : outcome.metrics)
      std::cout << key << " = " << value << '\n';
    if (!outcome.all_converged) {
      std::cerr << "remsim: at least one fit did not converge\n";
      return 1;
    }
  } catch (const std::exception& err) {
    std::cerr << "remsim: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
