#include "edgesched/harness/environment.hpp"

#include <chrono>
#include <numeric>

#include "edgesched/core/errors.hpp"
#include "edgesched/sim/simulator.hpp"

namespace edgesched::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// A scheduler-built action must place exactly the active tasks, each in its role.
void check_direct_action(const csm::ConstrainedAction& a, const TaskSets& sets, std::size_t hosts) {
  if (a.host_count != hosts || a.placements.size() != sets.active.size()) {
    throw InvariantViolation("scheduler action does not cover the active tasks");
  }
  auto it = sets.active.begin();
  for (const auto& p : a.placements) {
    if (p.task != *it++) throw InvariantViolation("scheduler action does not cover the active tasks");
    const bool is_new = sets.arriving.contains(p.task);
    if (is_new != (p.role == csm::Role::New)) throw InvariantViolation("scheduler action mislabels a task");
    if (!p.host && !is_new) throw InvariantViolation("scheduler left a running task without a host");
  }
}

}  // namespace

Environment::Environment(ClusterConfig cluster, WorkloadGenerator workload, std::optional<MinMaxTable> table)
    : cluster_(std::move(cluster)), workload_(std::move(workload)), table_(std::move(table)) {
  cluster_.validate();
  history_.host_utilization.resize(cluster_.hosts.size());
}

StateShape Environment::shape() const {
  return StateShape{cluster_.max_tasks, static_cast<int>(cluster_.hosts.size())};
}

IntervalRecord Environment::step(sched::Scheduler& scheduler) {
  const auto t_step = Clock::now();
  const int i = interval_;
  const double T = cluster_.interval_seconds;
  const auto& hosts = cluster_.hosts;

  // Tasks placed last interval that are still running.
  std::set<TaskId> continuing;
  std::set<TaskId> in_migration;
  for (const auto& [id, t] : tasks_) {
    if (!t.assigned_host) continue;
    continuing.insert(id);
    if (t.in_migration) in_migration.insert(id);
  }

  // Deferred tasks come back as new and count against the cap.
  std::set<TaskId> arriving = deferred_;
  const int current = static_cast<int>(continuing.size() + deferred_.size());
  for (auto& t : workload_.generate_new_tasks(i, current, cluster_.max_tasks)) {
    arriving.insert(t.id);
    tasks_.emplace(t.id, std::move(t));
  }

  TaskSets prev;
  prev.active = continuing;
  prev.active.insert(completed_last_.begin(), completed_last_.end());
  const TaskSets sets = advance_task_sets(prev, completed_last_, arriving, in_migration);

  sched::DecisionContext ctx;
  ctx.interval = i;
  ctx.interval_seconds = T;
  ctx.hosts = &hosts;
  ctx.tasks = &tasks_;
  ctx.sets = &sets;
  ctx.history = &history_;

  const StateShape sh = shape();
  std::optional<StateMatrices> state;
  if (collect_raw_) raw_states_.push_back(build_raw_state(hosts, tasks_, sets, sh));
  if (scheduler.needs_state()) {
    if (!table_) throw ConfigError("scheduler " + scheduler.name() + " needs a normalization table");
    state = build_state(hosts, tasks_, sets, *table_, sh);
    ctx.state = &*state;
  }

  const auto t_decide = Clock::now();
  sched::Decision decision = scheduler.decide(ctx);
  const double decide_seconds = seconds_since(t_decide);

  csm::ConstrainedAction action;
  if (auto* ranked = std::get_if<csm::RankedAction>(&decision)) {
    action = csm::constrain_action(*ranked, tasks_, hosts, sets);
  } else {
    action = std::get<csm::ConstrainedAction>(std::move(decision));
    check_direct_action(action, sets, hosts.size());
  }
  if (!csm::respects_capacity(action, tasks_, hosts)) {
    throw InvariantViolation(scheduler.name() + " committed an over-capacity placement");
  }
  scheduler.on_commit(ctx, action);

  const MigrationReport migrations = apply_action(tasks_, hosts, action);
  deferred_.clear();
  for (const auto& p : action.placements) {
    if (p.host) continue;
    deferred_.insert(p.task);
    tasks_.at(p.task).response_time_accum += T;
  }

  for (TaskId id : sets.active) {
    Task& t = tasks_.at(id);
    t.demand = sample_demand(t, i);
  }

  const IntervalOutcome outcome = run_interval(tasks_, hosts, T, i, migrations);

  std::vector<double> host_cpu(hosts.size(), 0.0);
  for (const auto& [id, t] : tasks_) {
    if (!t.assigned_host) continue;
    host_cpu[static_cast<std::size_t>(*t.assigned_host)] += t.demand.cpu_mips;
    history_.record_task(id, t.demand.cpu_mips);
  }
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    history_.record_host(h, host_cpu[h] / hosts[h].capacity.cpu_mips);
  }

  IntervalRecord rec;
  rec.interval = i;
  rec.metrics = compute_metrics(outcome, hosts, T, cluster_.hyperparams, norms_);
  rec.penalty = csm::penalty(action);
  rec.loss_pg = rec.metrics.loss + rec.penalty;
  scheduler.observe(rec.loss_pg, rec.penalty);

  rec.active = static_cast<int>(sets.active.size());
  rec.arriving = static_cast<int>(sets.arriving.size());
  rec.leaving = static_cast<int>(outcome.completed.size());
  rec.deferred = static_cast<int>(deferred_.size());
  rec.migrations = outcome.migration_count;
  rec.migration_time = outcome.total_migration_time;
  rec.energy_j = std::accumulate(outcome.energy_joules.begin(), outcome.energy_joules.end(), 0.0);
  rec.cost = std::accumulate(outcome.cost.begin(), outcome.cost.end(), 0.0);
  for (const auto& c : outcome.completed) {
    rec.response_time_sum += c.response_time;
    rec.completion_time_sum += c.lifetime();
    rec.sla_sum += sla_violation(c);
    rec.completed_within_expected += c.within_expected ? 1 : 0;
  }
  rec.mean_utilization =
      std::accumulate(outcome.utilization.begin(), outcome.utilization.end(), 0.0) /
      static_cast<double>(hosts.size());

  completed_last_.clear();
  for (const auto& c : outcome.completed) {
    completed_last_.insert(c.id);
    tasks_.erase(c.id);
    history_.forget_task(c.id);
  }
  ++interval_;
  timings_.push_back({i, decide_seconds, seconds_since(t_step)});
  return rec;
}

}  // namespace edgesched::harness
