#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "remsim/config.hpp"
#include "remsim/fitting.hpp"

namespace remsim {

struct RunOptions {
  uint64_t seed = 1;
  std::string out_dir = ".";
  int workers = 1;
  bool paper_scale = false;   // measurement-campaign statistics, not required
  bool with_oracle = false;   // run brute-force cross-checks where defined
};

struct ExperimentOutcome {
  std::string name;
  std::map<std::string, double> metrics;
  std::map<std::string, FitResult> fits;
  std::map<std::string, std::string> notes;
  std::vector<std::string> outputs;  // files written, relative to out_dir
  bool all_converged = true;
};

// CLI names in presentation order, without the "all" meta-entry.
const std::vector<std::string>& experiment_names();

// Runs one experiment (or "all": every experiment into a subdirectory each)
// and writes its CSV outputs plus manifest.json and summary.json.
ExperimentOutcome run_experiment(const std::string& name, const Config& cfg,
                                 const RunOptions& opt);

ExperimentOutcome run_inhomogeneous_scan(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_satellite_scan(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_autocorrelation(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_spectral_diffusion(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_lifetime_census(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_spin_spectrum(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_splitting_probe(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_rabi(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_hahn(const Config& cfg, const RunOptions& opt);
ExperimentOutcome run_xy4(const Config& cfg, const RunOptions& opt);

}  // namespace remsim
