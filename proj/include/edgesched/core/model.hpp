#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace edgesched {

using TaskId = std::int64_t;
using HostId = int;

/// A point in the four resource dimensions that tasks demand and hosts offer.
/// Bandwidths are megabytes per second, RAM is megabytes, CPU is MIPS.
struct Resources {
  double cpu_mips = 0.0;
  double ram_mb = 0.0;
  double net_bw_mbps = 0.0;
  double disk_bw_mbps = 0.0;

  Resources& operator+=(const Resources& o) {
    cpu_mips += o.cpu_mips;
    ram_mb += o.ram_mb;
    net_bw_mbps += o.net_bw_mbps;
    disk_bw_mbps += o.disk_bw_mbps;
    return *this;
  }
  Resources& operator-=(const Resources& o) {
    cpu_mips -= o.cpu_mips;
    ram_mb -= o.ram_mb;
    net_bw_mbps -= o.net_bw_mbps;
    disk_bw_mbps -= o.disk_bw_mbps;
    return *this;
  }
  friend Resources operator+(Resources a, const Resources& b) { return a += b; }
  friend Resources operator-(Resources a, const Resources& b) { return a -= b; }
  friend bool operator==(const Resources&, const Resources&) = default;

  bool non_negative() const {
    return cpu_mips >= 0.0 && ram_mb >= 0.0 && net_bw_mbps >= 0.0 && disk_bw_mbps >= 0.0;
  }
  // True iff every dimension is <= the matching dimension of `cap`.
  bool fits_within(const Resources& cap) const {
    return cpu_mips <= cap.cpu_mips && ram_mb <= cap.ram_mb &&
           net_bw_mbps <= cap.net_bw_mbps && disk_bw_mbps <= cap.disk_bw_mbps;
  }
};

enum class Layer { Edge, Cloud };

std::string to_string(Layer layer);
Layer parse_layer(const std::string& text);

inline constexpr std::size_t kPowerPoints = 11;

struct Host {
  HostId id = 0;
  std::string name;
  Layer layer = Layer::Edge;
  int cores = 1;
  Resources capacity;
  // Watts at 0%, 10%, ..., 100% CPU utilization.
  std::array<double, kPowerPoints> power_curve{};
  double cost_rate = 0.0;      // currency per hour
  double response_time = 0.0;  // seconds
  double energy_weight = 1.0;  // alpha_h

  double idle_power() const { return power_curve.front(); }
  double max_power() const { return power_curve.back(); }

  // Throws ValidationError if any Host invariant is broken.
  void validate() const;
};

/// Per-interval demand profile a task follows. Offsets past the end hold the
/// last entry.
using DemandProfile = std::vector<Resources>;

struct Task {
  TaskId id = 0;
  int created_at = 0;            // interval index of arrival
  double total_duration = 0.0;   // seconds of execution at requested MIPS
  double elapsed = 0.0;          // seconds of work completed
  Resources demand;              // most recent demand sample
  std::shared_ptr<const DemandProfile> profile;
  std::optional<HostId> assigned_host;
  bool in_migration = false;
  double migration_remaining = 0.0;   // seconds left on the current transfer
  double response_time_accum = 0.0;   // waiting + host response + execution
  double migration_time_accum = 0.0;
  double throttled_time = 0.0;        // seconds run below requested MIPS
  double expected_completion = 0.0;   // seconds after arrival, unthrottled

  void validate() const;
};

using TaskMap = std::map<TaskId, Task>;

/// Interval set algebra: a_i, l_i, n_i and m_i.
struct TaskSets {
  std::set<TaskId> active;
  std::set<TaskId> leaving;
  std::set<TaskId> arriving;
  std::set<TaskId> migratable;

  // a_{i-1} \ l_i, i.e. the tasks that were already running.
  std::set<TaskId> continuing() const;
};

struct Hyperparams {
  double alpha = 0.4;    // energy
  double beta = 0.16;    // response time
  double gamma = 0.174;  // migration time
  double delta = 0.135;  // cost
  double epsilon = 0.19; // SLA violations

  static Hyperparams single(int metric_index);
  void validate() const;
  std::array<double, 5> as_array() const { return {alpha, beta, gamma, delta, epsilon}; }
};

struct ClusterConfig {
  std::vector<Host> hosts;
  int max_tasks = 100;
  double interval_seconds = 300.0;
  Hyperparams hyperparams;
  int episode_size = 12;

  void validate() const;
};

/// Computes the next interval's sets: active = prev.active ∪ new \ completed.
/// Tasks listed in `in_migration` are excluded from the migratable set.
TaskSets advance_task_sets(const TaskSets& prev, const std::set<TaskId>& completed,
                           const std::set<TaskId>& new_tasks,
                           const std::set<TaskId>& in_migration = {});

/// True iff placing `task` on `host` on top of `current_load` exceeds no capacity.
bool is_suitable(const Host& host, const Task& task, const Resources& current_load);

}  // namespace edgesched
