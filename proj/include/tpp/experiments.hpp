#ifndef TPP_EXPERIMENTS_HPP
#define TPP_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <vector>

namespace tpp {

struct ExperimentResult {
  std::string name;
  std::map<std::string, double> metrics;
  std::vector<std::string> files;  // written under the output directory
  bool ok = true;                  // built-in sanity checks passed
};

std::vector<std::string> experiment_names();

// Bundled topology JSON by name ("dumbbell6", "rcp_parking_lot", "leaf_spine").
const std::string& builtin_topology(const std::string& name);

// Runs a named preset, writes its CSV outputs and a manifest.json under
// `outdir`.  duration_s <= 0 picks the preset's default.
ExperimentResult run_experiment(const std::string& name, const std::string& outdir,
                                uint64_t seed = 1, double duration_s = 0);

}  // namespace tpp

#endif
