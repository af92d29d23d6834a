#include "remsim/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace remsim {

namespace {

void dump(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

void RunManifest::write(const std::string& out_dir) const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["workers"] = workers;
  j["outputs"] = outputs;
  j["metrics"] = metrics;
  if (!notes.empty()) j["notes"] = notes;
  dump(j, out_dir + "/manifest.json");
}

void write_fit_summary(const std::string& out_dir,
                       const std::map<std::string, FitResult>& fits,
                       const std::map<std::string, double>& metrics) {
  nlohmann::json j;
  j["metrics"] = metrics;
  for (const auto& [name, fit] : fits) {
    nlohmann::json f;
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
      f["params"][fit.names[i]] = fit.params[i];
      f["stderrs"][fit.names[i]] = fit.stderrs[i];
    }
    f["converged"] = fit.converged;
    f["iterations"] = fit.iterations;
    f["residual_norm"] = fit.residual_norm;
    if (!fit.diagnostic.empty()) f["diagnostic"] = fit.diagnostic;
    j["fits"][name] = f;
  }
  dump(j, out_dir + "/summary.json");
}

}  // namespace remsim
