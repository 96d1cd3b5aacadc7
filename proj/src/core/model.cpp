#include "edgesched/core/model.hpp"

#include <algorithm>
#include <cmath>

#include "edgesched/core/errors.hpp"

namespace edgesched {

std::string to_string(Layer layer) { return layer == Layer::Edge ? "edge" : "cloud"; }

Layer parse_layer(const std::string& text) {
  if (text == "edge") return Layer::Edge;
  if (text == "cloud") return Layer::Cloud;
  throw ParseError("unknown host layer '" + text + "'");
}

void Host::validate() const {
  if (!capacity.non_negative()) throw ValidationError("host " + name + ": negative capacity");
  if (!std::is_sorted(power_curve.begin(), power_curve.end())) {
    throw ValidationError("host " + name + ": power curve must be non-decreasing");
  }
  if (power_curve.front() < 0.0) throw ValidationError("host " + name + ": negative power");
  if (cost_rate < 0.0) throw ValidationError("host " + name + ": negative cost rate");
  if (!(energy_weight >= 0.0 && energy_weight <= 1.0)) {
    throw ValidationError("host " + name + ": energy weight outside [0,1]");
  }
  if (response_time < 0.0) throw ValidationError("host " + name + ": negative response time");
}

void Task::validate() const {
  if (elapsed > total_duration) {
    throw InvariantViolation("task " + std::to_string(id) + ": elapsed exceeds duration");
  }
  if (in_migration && !assigned_host) {
    throw InvariantViolation("task " + std::to_string(id) + ": migrating without a host");
  }
  if (!demand.non_negative()) {
    throw InvariantViolation("task " + std::to_string(id) + ": negative demand");
  }
}

std::set<TaskId> TaskSets::continuing() const {
  std::set<TaskId> out;
  std::set_difference(active.begin(), active.end(), arriving.begin(), arriving.end(),
                      std::inserter(out, out.end()));
  return out;
}

Hyperparams Hyperparams::single(int metric_index) {
  if (metric_index < 0 || metric_index > 4) throw DomainError("metric index outside 0..4");
  Hyperparams h{0, 0, 0, 0, 0};
  switch (metric_index) {
    case 0: h.alpha = 1; break;
    case 1: h.beta = 1; break;
    case 2: h.gamma = 1; break;
    case 3: h.delta = 1; break;
    default: h.epsilon = 1; break;
  }
  return h;
}

void Hyperparams::validate() const {
  double sum = 0.0;
  for (double v : as_array()) {
    if (!(v >= 0.0)) throw ValidationError("hyperparameters must be non-negative");
    sum += v;
  }
  // The published default weights sum to 1.059, so only a positive total is required.
  if (!(sum > 0.0)) throw ValidationError("hyperparameters must not all be zero");
}

void ClusterConfig::validate() const {
  if (max_tasks < 1) throw ValidationError("max_tasks must be at least 1");
  if (!(interval_seconds > 0.0)) throw ValidationError("interval length must be positive");
  if (episode_size < 1) throw ValidationError("episode size must be at least 1");
  if (hosts.empty()) throw ValidationError("cluster has no hosts");
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    if (hosts[i].id != static_cast<HostId>(i)) {
      throw ValidationError("host ids must be 0..n-1 in order");
    }
    hosts[i].validate();
  }
  hyperparams.validate();
}

TaskSets advance_task_sets(const TaskSets& prev, const std::set<TaskId>& completed,
                           const std::set<TaskId>& new_tasks,
                           const std::set<TaskId>& in_migration) {
  for (TaskId id : completed) {
    if (!prev.active.contains(id)) {
      throw InvariantViolation("completed task " + std::to_string(id) + " was not active");
    }
  }
  for (TaskId id : new_tasks) {
    if (prev.active.contains(id)) {
      throw InvariantViolation("new task " + std::to_string(id) + " is already active");
    }
  }
  TaskSets next;
  next.leaving = completed;
  next.arriving = new_tasks;
  for (TaskId id : prev.active) {
    if (completed.contains(id)) continue;
    next.active.insert(id);
    if (!in_migration.contains(id)) next.migratable.insert(id);
  }
  next.active.insert(new_tasks.begin(), new_tasks.end());
  return next;
}

bool is_suitable(const Host& host, const Task& task, const Resources& current_load) {
  return (current_load + task.demand).fits_within(host.capacity);
}

}  // namespace edgesched
