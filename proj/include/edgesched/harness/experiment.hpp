#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgesched/featurize/featurize.hpp"
#include "edgesched/harness/config.hpp"
#include "edgesched/harness/environment.hpp"
#include "edgesched/metrics/records.hpp"
#include "edgesched/sched/learners.hpp"

namespace edgesched::harness {

ClusterConfig make_cluster(const ExperimentConfig& config);
WorkloadGenerator make_workload(const ExperimentConfig& config, std::uint64_t seed);

/// Normalization table fitted on a sample run of the LR-MMT heuristic.
MinMaxTable fit_norms(const ExperimentConfig& config);
/// The configured table, or a freshly fitted one.
MinMaxTable resolve_norms(const ExperimentConfig& config);

struct ExecuteOptions {
  // Stop every agent once the mean loss of the last `target_window` updates
  // reaches this value.
  std::optional<double> target_loss;
  int target_window = 5;
};

struct RunResult {
  std::vector<std::vector<IntervalRecord>> agent_records;  // agent 0 first
  std::vector<std::vector<IntervalTiming>> agent_timings;
  std::vector<sched::TrainingLogEntry> training_log;
  EvaluationReport report;  // agent 0
  int updates = 0;
  double wall_seconds = 0.0;
  std::optional<double> seconds_to_target;
  std::optional<nn::R2N2Params> r2n2;
  std::optional<nn::MlpParams> mlp;

  const std::vector<IntervalRecord>& records() const { return agent_records.front(); }
};

/// Runs the configured scheduler for config.intervals intervals per agent,
/// with a learner update every episode_size intervals and at the end. No I/O
/// beyond reading the configured inputs.
RunResult execute(const ExperimentConfig& config, const MinMaxTable& table, const ExecuteOptions& opts = {});

/// execute() plus artifacts in config.output_dir: config.txt, norms.txt,
/// intervals.csv, report.txt, timing.csv, and for learners training_log.csv
/// and checkpoint.txt.
RunResult run_experiment(const ExperimentConfig& config);

void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                     const MinMaxTable& table, const RunResult& result);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct ComparisonRow {
  std::string name;
  EvaluationReport report;
};

/// Aggregates recomputed from each run directory's intervals.csv.
std::vector<ComparisonRow> compare_runs(const std::vector<std::filesystem::path>& run_dirs);
std::string format_comparison(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct ScalingRow {
  int agents = 1;
  bool reached = false;
  double seconds = 0.0;
  double speedup = 0.0;
  double efficiency = 0.0;
  int updates = 0;
};

/// Wall time for n agents to bring the mean loss of the last `window` updates
/// down to `target_loss`; speedup and efficiency are relative to the first count.
std::vector<ScalingRow> measure_scaling(const ExperimentConfig& config, const std::vector<int>& agent_counts,
                                        double target_loss, const MinMaxTable& table, int window = 5);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace edgesched::harness
