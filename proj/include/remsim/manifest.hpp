#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "remsim/fitting.hpp"

namespace remsim {

struct RunManifest {
  std::string experiment;
  std::string config_digest;
  uint64_t seed = 0;
  int workers = 1;
  std::vector<std::string> outputs;             // files written, relative to out dir
  std::map<std::string, double> metrics;        // acceptance-relevant quantities
  std::map<std::string, std::string> notes;     // e.g. selected emitter id

  void write(const std::string& out_dir) const;  // out_dir/manifest.json
};

// summary.json: named fit results with params, stderrs, convergence
void write_fit_summary(const std::string& out_dir,
                       const std::map<std::string, FitResult>& fits,
                       const std::map<std::string, double>& metrics);

}  // namespace remsim
