#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "edgesched/core/model.hpp"
#include "edgesched/csm/csm.hpp"
#include "edgesched/featurize/featurize.hpp"

namespace edgesched::sched {

/// Recent per-host CPU demand (as a fraction of capacity, not clipped) and
/// per-task CPU demand, oldest first.
struct History {
  std::size_t window = 10;
  std::vector<std::deque<double>> host_utilization;
  std::map<TaskId, std::deque<double>> task_cpu;

  void record_host(std::size_t host, double utilization);
  void record_task(TaskId task, double mips);
  void forget_task(TaskId task) { task_cpu.erase(task); }
};

/// Everything a scheduler may look at when deciding interval `interval`.
/// Task demands are the values observed in the previous interval.
struct DecisionContext {
  int interval = 0;
  double interval_seconds = 300.0;
  const std::vector<Host>* hosts = nullptr;
  const TaskMap* tasks = nullptr;
  const TaskSets* sets = nullptr;
  const StateMatrices* state = nullptr;  // standardized; set when needs_state()
  const History* history = nullptr;
};

using Decision = std::variant<csm::RankedAction, csm::ConstrainedAction>;

/// Interface shared by heuristics and learners. The environment calls, per
/// interval: decide, on_commit, observe; and end_episode every episode_size
/// intervals plus once at the end of a run.
class Scheduler {
 public:
  virtual ~Scheduler() = default;

  virtual std::string name() const = 0;
  virtual bool needs_state() const { return false; }
  virtual Decision decide(const DecisionContext& ctx) = 0;

  /// The resolved action for the decision just made.
  virtual void on_commit(const DecisionContext&, const csm::ConstrainedAction&) {}
  /// Loss^PG and penalty produced by the last committed decision.
  virtual void observe(double /*loss_pg*/, double /*penalty*/) {}
  /// Returns true when a parameter update was applied.
  virtual bool end_episode() { return false; }

  virtual void set_learning(bool) {}
  virtual bool is_learner() const { return false; }
  virtual void save_checkpoint(const std::filesystem::path&) const {}
};

/// Rows of the output matrix that belong to tasks, taken from the state.
std::vector<TaskId> row_tasks(const DecisionContext& ctx);

}  // namespace edgesched::sched
