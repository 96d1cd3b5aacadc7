#pragma once

#include <optional>
#include <vector>

#include "edgesched/core/model.hpp"

namespace edgesched::csm {

/// One task's hosts in decreasing order of preference.
struct RankedRow {
  TaskId task = 0;
  std::vector<HostId> hosts;
};

/// Unconstrained policy output: a ranked host list per task.
struct RankedAction {
  std::vector<RankedRow> rows;
};

enum class Role { New, Migratable, Blocked };

struct Placement {
  TaskId task = 0;
  Role role = Role::New;
  // Committed host. Empty only for a new task deferred to the next interval.
  std::optional<HostId> host;
  // Position of `host` in the task's ranking; equal to the host count when no
  // ranked host was suitable (fallback or deferral).
  int rank = 0;
  bool fallback = false;
  // Blocked tasks only: the ranking resolved to a host other than the current one.
  bool blocked_migration = false;
};

struct ConstrainedAction {
  std::vector<Placement> placements;  // ascending task id, one per active task
  std::size_t host_count = 0;

  const Placement* find(TaskId task) const;
  std::size_t deferred_count() const;
};

/// Resolves rankings into a feasible assignment. Tasks are processed in
/// ascending id; each new or migratable task takes the first host in its
/// ranking that is suitable given the commitments made so far. Non-migratable
/// tasks stay put. A continuing task with no suitable host keeps its host; a
/// new one is deferred.
///
/// `tasks` must hold every active task with its current demand; rows must cover
/// exactly the new and migratable tasks, plus optional rows for blocked tasks.
ConstrainedAction constrain_action(const RankedAction& ranked, const TaskMap& tasks,
                                   const std::vector<Host>& hosts, const TaskSets& sets);

/// Host-allocation plus blocked-migration penalty of a resolved action.
/// 0 for an empty action.
double penalty(const ConstrainedAction& action);

/// Per-host committed load implied by an action.
std::vector<Resources> committed_loads(const ConstrainedAction& action, const TaskMap& tasks,
                                       std::size_t host_count);

/// Post-hoc check that no host is over capacity in any dimension, ignoring
/// hosts whose overload comes only from fallback (no suitable host) tasks.
bool respects_capacity(const ConstrainedAction& action, const TaskMap& tasks,
                       const std::vector<Host>& hosts);

/// Convenience for schedulers that decide single hosts directly: the committed
/// host goes first, the others follow in id order.
RankedRow row_with_first(TaskId task, HostId first, std::size_t host_count);

}  // namespace edgesched::csm
