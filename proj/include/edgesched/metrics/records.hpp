#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "edgesched/metrics/metrics.hpp"

namespace edgesched {

inline constexpr int kIntervalCsvVersion = 1;

/// One row of the per-interval run CSV. `loss` and `penalty` score the decision
/// taken at the start of this interval, i.e. they feed the next interval's
/// learner input.
struct IntervalRecord {
  int interval = 0;
  int active = 0;
  int arriving = 0;
  int leaving = 0;  // tasks that completed during this interval
  int deferred = 0;
  int migrations = 0;
  double migration_time = 0.0;
  double energy_j = 0.0;
  double cost = 0.0;
  IntervalMetrics metrics;
  double penalty = 0.0;
  double loss_pg = 0.0;
  double response_time_sum = 0.0;
  double completion_time_sum = 0.0;
  double sla_sum = 0.0;
  int completed_within_expected = 0;
  double mean_utilization = 0.0;

  friend bool operator==(const IntervalRecord&, const IntervalRecord&) = default;
};

const std::vector<std::string>& interval_csv_columns();
void write_interval_csv(std::ostream& out, std::span<const IntervalRecord> records);
std::vector<IntervalRecord> read_interval_csv(std::istream& in);
std::vector<IntervalRecord> read_interval_csv(const std::filesystem::path& path);

/// Whole-run evaluation figures.
struct EvaluationReport {
  int intervals = 0;
  double total_energy_j = 0.0;
  double average_response_time = 0.0;
  double sla_violation = 0.0;  // weighted by leaving counts
  double total_cost = 0.0;
  double average_completion_time = 0.0;
  int completed_tasks = 0;
  double completed_within_expected_fraction = 0.0;
  double migrations_per_interval = 0.0;
  double migration_time_per_interval = 0.0;
  double mean_loss = 0.0;
  double mean_penalty = 0.0;
  double mean_loss_pg = 0.0;

  std::map<std::string, double> as_map() const;
};

EvaluationReport evaluation_aggregates(std::span<const IntervalRecord> records);

/// Flat `key=value` text, one entry per line, keys sorted.
void write_key_values(std::ostream& out, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_key_values(std::istream& in);
void write_report(std::ostream& out, const EvaluationReport& report);
EvaluationReport read_report(std::istream& in);

}  // namespace edgesched
