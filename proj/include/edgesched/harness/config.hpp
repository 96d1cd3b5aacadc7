#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "edgesched/core/model.hpp"

namespace edgesched::harness {

/// Everything that defines one run. Serialized as flat key=value text.
struct ExperimentConfig {
  std::string scheduler = "a3c";
  std::string cluster = "desk";    // desk | full | path to a host table CSV
  std::string workload = "synthetic";  // synthetic | trace
  std::string trace_dir;
  std::string trace_split = "all";  // all | train | test
  double train_fraction = 0.75;
  std::uint64_t seed = 1;
  int intervals = 288;
  int episode_size = 12;
  double interval_seconds = 300.0;
  int max_tasks = 16;
  Hyperparams hyperparams;
  int agents = 4;
  std::string output_dir = "run";

  double mean_new = 12.0;
  double std_new = 5.0;
  double mean_duration = 1800.0;
  double std_duration = 300.0;

  int hidden = 64;
  double learning_rate = 1e-2;
  double min_learning_rate = 1e-3;  ///< capped at learning_rate
  double grad_clip = 0.0;
  bool learning = true;
  std::string init_checkpoint;  // start from these parameters
  std::string norms;            // normalization table; fitted when empty
  int norm_sample_intervals = 288;

  double dqn_learning_rate = 1e-3;
  double dqn_discount = 0.9;

  /// Applies one key=value setting; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  void validate() const;

  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Every configuration key, in a stable order.
const std::vector<std::string>& config_keys();

/// Registered scheduler names.
const std::vector<std::string>& scheduler_names();

}  // namespace edgesched::harness
