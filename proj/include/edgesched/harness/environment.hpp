#pragma once

#include <optional>
#include <set>
#include <vector>

#include "edgesched/core/model.hpp"
#include "edgesched/featurize/featurize.hpp"
#include "edgesched/metrics/metrics.hpp"
#include "edgesched/metrics/records.hpp"
#include "edgesched/sched/scheduler.hpp"
#include "edgesched/workload/workload.hpp"

namespace edgesched::harness {

struct IntervalTiming {
  int interval = 0;
  double decide_seconds = 0.0;
  double step_seconds = 0.0;
};

/// One simulation replica: cluster, task population, workload source and the
/// running normalizers. Each call to step() is one scheduling interval.
class Environment {
 public:
  Environment(ClusterConfig cluster, WorkloadGenerator workload,
              std::optional<MinMaxTable> table = std::nullopt);

  /// Arrivals, decision, constraint resolution, simulation and metrics for the
  /// next interval. The scheduler sees observe() before this returns.
  IntervalRecord step(sched::Scheduler& scheduler);

  /// Keep each interval's unstandardized state, for fitting normalization.
  void collect_raw_states(bool on) { collect_raw_ = on; }
  const std::vector<StateMatrices>& raw_states() const { return raw_states_; }

  const std::vector<IntervalTiming>& timings() const { return timings_; }
  const TaskMap& tasks() const { return tasks_; }
  const ClusterConfig& cluster() const { return cluster_; }
  StateShape shape() const;
  int interval() const { return interval_; }

 private:
  ClusterConfig cluster_;
  WorkloadGenerator workload_;
  std::optional<MinMaxTable> table_;
  TaskMap tasks_;
  std::set<TaskId> deferred_;
  std::set<TaskId> completed_last_;
  RunningNormalizers norms_;
  sched::History history_;
  int interval_ = 0;
  bool collect_raw_ = false;
  std::vector<StateMatrices> raw_states_;
  std::vector<IntervalTiming> timings_;
};

}  // namespace edgesched::harness
