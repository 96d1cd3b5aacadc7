#include "edgesched/csm/csm.hpp"

#include <algorithm>
#include <map>

#include "edgesched/core/errors.hpp"

namespace edgesched::csm {

const Placement* ConstrainedAction::find(TaskId task) const {
  const auto it = std::lower_bound(placements.begin(), placements.end(), task,
                                   [](const Placement& p, TaskId id) { return p.task < id; });
  return it != placements.end() && it->task == task ? &*it : nullptr;
}

std::size_t ConstrainedAction::deferred_count() const {
  return static_cast<std::size_t>(
      std::count_if(placements.begin(), placements.end(), [](const Placement& p) { return !p.host; }));
}

namespace {

void check_permutation(const RankedRow& row, std::size_t n) {
  if (row.hosts.size() != n) {
    throw InvariantViolation("ranking for task " + std::to_string(row.task) +
                             " does not list every host");
  }
  std::vector<bool> seen(n, false);
  for (HostId h : row.hosts) {
    if (h < 0 || static_cast<std::size_t>(h) >= n || seen[static_cast<std::size_t>(h)]) {
      throw InvariantViolation("ranking for task " + std::to_string(row.task) +
                               " is not a permutation of host ids");
    }
    seen[static_cast<std::size_t>(h)] = true;
  }
}

const Task& task_at(const TaskMap& tasks, TaskId id) {
  const auto it = tasks.find(id);
  if (it == tasks.end()) throw InvariantViolation("unknown task " + std::to_string(id));
  return it->second;
}

HostId current_host(const Task& t, std::size_t n) {
  if (!t.assigned_host || *t.assigned_host < 0 || static_cast<std::size_t>(*t.assigned_host) >= n) {
    throw InvariantViolation("continuing task " + std::to_string(t.id) + " has no valid host");
  }
  return *t.assigned_host;
}

}  // namespace

ConstrainedAction constrain_action(const RankedAction& ranked, const TaskMap& tasks,
                                   const std::vector<Host>& hosts, const TaskSets& sets) {
  const std::size_t n = hosts.size();
  std::map<TaskId, const RankedRow*> rows;
  for (const auto& row : ranked.rows) {
    if (!sets.active.contains(row.task)) {
      throw InvariantViolation("ranking given for inactive task " + std::to_string(row.task));
    }
    check_permutation(row, n);
    if (!rows.emplace(row.task, &row).second) {
      throw InvariantViolation("duplicate ranking for task " + std::to_string(row.task));
    }
  }

  auto role_of = [&](TaskId id) {
    if (sets.arriving.contains(id)) return Role::New;
    if (sets.migratable.contains(id)) return Role::Migratable;
    return Role::Blocked;
  };

  // Tasks that cannot move are committed before anything else.
  std::vector<Resources> load(n);
  for (TaskId id : sets.active) {
    if (role_of(id) == Role::Blocked) {
      const Task& t = task_at(tasks, id);
      load[static_cast<std::size_t>(current_host(t, n))] += t.demand;
    }
  }

  ConstrainedAction action;
  action.host_count = n;
  action.placements.reserve(sets.active.size());
  for (TaskId id : sets.active) {
    const Task& t = task_at(tasks, id);
    Placement p;
    p.task = id;
    p.role = role_of(id);
    const auto row_it = rows.find(id);

    if (p.role == Role::Blocked) {
      const HostId cur = current_host(t, n);
      p.host = cur;
      if (row_it != rows.end()) {
        for (HostId h : row_it->second->hosts) {
          if (h == cur) break;
          if (is_suitable(hosts[static_cast<std::size_t>(h)], t, load[static_cast<std::size_t>(h)])) {
            p.blocked_migration = true;
            break;
          }
        }
      }
      action.placements.push_back(p);
      continue;
    }

    if (row_it == rows.end()) {
      throw InvariantViolation("no ranking for schedulable task " + std::to_string(id));
    }
    const auto& order = row_it->second->hosts;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto h = static_cast<std::size_t>(order[k]);
      if (is_suitable(hosts[h], t, load[h])) {
        p.host = order[k];
        p.rank = static_cast<int>(k);
        load[h] += t.demand;
        break;
      }
    }
    if (!p.host) {
      p.rank = static_cast<int>(n);
      if (p.role == Role::Migratable) {
        const HostId cur = current_host(t, n);
        p.host = cur;
        p.fallback = true;
        load[static_cast<std::size_t>(cur)] += t.demand;
      }
    }
    action.placements.push_back(p);
  }
  return action;
}

double penalty(const ConstrainedAction& action) {
  const std::size_t active = action.placements.size();
  if (active == 0 || action.host_count == 0) return 0.0;
  double rank_sum = 0.0;
  double blocked = 0.0;
  // Blocked tasks have no ranking of their own and resolve at rank 0.
  for (const auto& p : action.placements) {
    rank_sum += p.rank;
    if (p.role == Role::Blocked && p.blocked_migration) blocked += 1.0;
  }
  const auto a = static_cast<double>(active);
  return rank_sum / (a * static_cast<double>(action.host_count)) + blocked / a;
}

std::vector<Resources> committed_loads(const ConstrainedAction& action, const TaskMap& tasks,
                                       std::size_t host_count) {
  std::vector<Resources> load(host_count);
  for (const auto& p : action.placements) {
    if (!p.host) continue;
    load[static_cast<std::size_t>(*p.host)] += task_at(tasks, p.task).demand;
  }
  return load;
}

bool respects_capacity(const ConstrainedAction& action, const TaskMap& tasks,
                       const std::vector<Host>& hosts) {
  std::vector<Resources> load(hosts.size());
  std::vector<bool> exempt(hosts.size(), false);
  for (const auto& p : action.placements) {
    if (!p.host) continue;
    const auto h = static_cast<std::size_t>(*p.host);
    load[h] += task_at(tasks, p.task).demand;
    if (p.fallback || p.role == Role::Blocked) exempt[h] = true;
  }
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    if (!exempt[h] && !load[h].fits_within(hosts[h].capacity)) return false;
  }
  return true;
}

RankedRow row_with_first(TaskId task, HostId first, std::size_t host_count) {
  RankedRow row;
  row.task = task;
  row.hosts.reserve(host_count);
  row.hosts.push_back(first);
  for (std::size_t h = 0; h < host_count; ++h) {
    if (static_cast<HostId>(h) != first) row.hosts.push_back(static_cast<HostId>(h));
  }
  return row;
}

}  // namespace edgesched::csm
