#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/baselines.hpp"
#include "oapel/pipeline.hpp"
#include "oapel/synthdata.hpp"

namespace oapel::cli {

/// Every tunable of a run. Unknown keys are rejected when reading.
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t k = 6;
  std::string model = "OAP-EL";  // train, evaluate, kappa
  std::vector<std::string> models = {"OAP-EL", "AB-EL"};  // compare
  std::vector<double> lambda_grid = {0.001, 0.01, 0.1};
  std::vector<int> depth_grid = {2, 4, 6, 8};
  bool nested = true;
  std::size_t replications = 100;
  std::size_t k_min = 1;
  std::size_t k_max = 100;
  std::size_t sweep_replications = 100;
  double label_threshold = 85.0;
  double decision_threshold = 0.5;
  int threads = 1;
  pipeline::EnsembleConfig ensemble;
  baselines::BaselineConfig baselines;  // its ensemble part mirrors `ensemble`
  synthdata::SynthSpec synth;

  std::string features;
  std::string labels;
  std::string parcellation;
  std::string metrics;
  std::string model_path;
  std::string forced_partition;
  std::string out_dir = ".";

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Accepts a bare config object or a run manifest ({"command", "version", "config"}).
RunConfig run_config_from_json(const nlohmann::json& j);

const std::vector<std::string>& command_names();

/// Version string recorded in manifests.
std::string version();

/// Full command-line entry point; returns the process exit code
/// (0 success, 1 usage, 2 data, 3 numerical).
int run(int argc, char** argv);

}  // namespace oapel::cli
