#pragma once

#include <map>
#include <vector>

#include "edgesched/core/model.hpp"
#include "edgesched/csm/csm.hpp"

namespace edgesched {

struct MigrationReport {
  int migration_count = 0;
  double total_migration_time = 0.0;
  std::map<TaskId, double> migration_time;  // only tasks migrated this interval
};

/// A task that finished during the interval, with everything the metrics need.
struct CompletedTask {
  TaskId id = 0;
  HostId host = 0;
  double completion_time = 0.0;  // absolute simulation seconds
  double arrival_time = 0.0;
  double response_time = 0.0;    // waiting + host response + execution
  double throttled_time = 0.0;
  double migration_time = 0.0;   // accumulated over the task's life
  double total_duration = 0.0;
  bool within_expected = false;

  double lifetime() const { return completion_time - arrival_time; }
};

struct IntervalOutcome {
  std::vector<double> energy_joules;  // per host
  std::vector<double> cost;           // per host, currency
  std::vector<double> utilization;    // per host, interval-mean CPU in [0,1]
  std::vector<CompletedTask> completed;
  int migration_count = 0;
  double total_migration_time = 0.0;
  std::vector<double> task_migration_times;  // one entry per active task
  int active_count = 0;
};

/// Seconds to move a task's memory image over the slower of the two links.
double migration_time(const Task& task, const Host& from, const Host& to);

/// Binds new tasks to their hosts and starts migrations. Deferred tasks are
/// left untouched.
MigrationReport apply_action(TaskMap& tasks, const std::vector<Host>& hosts,
                             const csm::ConstrainedAction& action);

/// Executes every placed task for one interval at its current demand. Hosts
/// over-subscribed on CPU throttle all their tasks proportionally. Finished
/// tasks are reported in the outcome and stay in `tasks` for the caller to drop.
IntervalOutcome run_interval(TaskMap& tasks, const std::vector<Host>& hosts,
                             double interval_seconds, int interval_index,
                             const MigrationReport& migrations = {});

}  // namespace edgesched
