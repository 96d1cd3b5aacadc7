#include "edgesched/sim/simulator.hpp"

#include <algorithm>

#include "edgesched/core/errors.hpp"
#include "edgesched/sim/power.hpp"

namespace edgesched {

double migration_time(const Task& task, const Host& from, const Host& to) {
  const double link = std::min(from.capacity.net_bw_mbps, to.capacity.net_bw_mbps);
  if (!(link > 0.0)) throw InvariantViolation("migration over a zero-bandwidth link");
  return task.demand.ram_mb / link;
}

MigrationReport apply_action(TaskMap& tasks, const std::vector<Host>& hosts,
                             const csm::ConstrainedAction& action) {
  MigrationReport report;
  for (const auto& p : action.placements) {
    const auto it = tasks.find(p.task);
    if (it == tasks.end()) throw InvariantViolation("action names unknown task " + std::to_string(p.task));
    Task& t = it->second;
    if (!p.host) {
      if (p.role != csm::Role::New) {
        throw InvariantViolation("only new tasks may be deferred");
      }
      continue;
    }
    const HostId h = *p.host;
    if (h < 0 || static_cast<std::size_t>(h) >= hosts.size()) {
      throw InvariantViolation("action names unknown host " + std::to_string(h));
    }
    if (p.role == csm::Role::New) {
      t.assigned_host = h;
      t.response_time_accum += hosts[static_cast<std::size_t>(h)].response_time;
      continue;
    }
    if (!t.assigned_host) throw InvariantViolation("continuing task without a host");
    if (*t.assigned_host == h) continue;
    if (p.role == csm::Role::Blocked) {
      throw InvariantViolation("non-migratable task " + std::to_string(p.task) + " was moved");
    }
    const double m = migration_time(t, hosts[static_cast<std::size_t>(*t.assigned_host)],
                                    hosts[static_cast<std::size_t>(h)]);
    t.assigned_host = h;
    t.in_migration = true;
    t.migration_remaining = m;
    t.migration_time_accum += m;
    ++report.migration_count;
    report.total_migration_time += m;
    report.migration_time[t.id] = m;
  }
  return report;
}

IntervalOutcome run_interval(TaskMap& tasks, const std::vector<Host>& hosts,
                             double interval_seconds, int interval_index,
                             const MigrationReport& migrations) {
  const std::size_t n = hosts.size();
  const double start = interval_seconds * interval_index;
  IntervalOutcome out;
  out.energy_joules.assign(n, 0.0);
  out.cost.assign(n, 0.0);
  out.utilization.assign(n, 0.0);
  out.migration_count = migrations.migration_count;
  out.total_migration_time = migrations.total_migration_time;

  std::vector<double> demand_mips(n, 0.0);
  std::vector<int> task_count(n, 0);
  for (const auto& [id, t] : tasks) {
    if (!t.assigned_host) continue;
    const auto h = static_cast<std::size_t>(*t.assigned_host);
    if (h >= n) throw InvariantViolation("task placed on unknown host");
    demand_mips[h] += t.demand.cpu_mips;
    ++task_count[h];
  }
  std::vector<double> throttle(n, 1.0);
  for (std::size_t h = 0; h < n; ++h) {
    if (demand_mips[h] > hosts[h].capacity.cpu_mips) {
      throttle[h] = hosts[h].capacity.cpu_mips / demand_mips[h];
    }
  }

  std::vector<double> mips_seconds(n, 0.0);
  for (auto& [id, t] : tasks) {
    if (!t.assigned_host) continue;
    const auto h = static_cast<std::size_t>(*t.assigned_host);
    ++out.active_count;
    const auto mig = migrations.migration_time.find(id);
    out.task_migration_times.push_back(mig == migrations.migration_time.end() ? 0.0 : mig->second);

    const double f = throttle[h];
    const double remaining = t.total_duration - t.elapsed;
    double executed = interval_seconds;
    bool done = false;
    if (remaining <= interval_seconds * f) {
      executed = remaining / f;
      t.elapsed = t.total_duration;
      done = true;
    } else {
      t.elapsed += interval_seconds * f;
    }
    mips_seconds[h] += t.demand.cpu_mips * f * executed;
    if (f < 1.0) t.throttled_time += executed;
    t.response_time_accum += executed;

    if (t.in_migration) {
      t.migration_remaining -= interval_seconds;
      if (t.migration_remaining <= 0.0) {
        t.migration_remaining = 0.0;
        t.in_migration = false;
      }
    }
    if (done) {
      CompletedTask c;
      c.id = id;
      c.host = *t.assigned_host;
      c.completion_time = start + executed;
      c.arrival_time = interval_seconds * t.created_at;
      c.response_time = t.response_time_accum;
      c.throttled_time = t.throttled_time;
      c.migration_time = t.migration_time_accum;
      c.total_duration = t.total_duration;
      c.within_expected = c.lifetime() <= t.expected_completion + 1e-9;
      out.completed.push_back(c);
    }
  }

  for (std::size_t h = 0; h < n; ++h) {
    const double u = std::clamp(mips_seconds[h] / (hosts[h].capacity.cpu_mips * interval_seconds), 0.0, 1.0);
    out.utilization[h] = u;
    out.energy_joules[h] = interpolate_power(hosts[h], u) * interval_seconds;
    out.cost[h] = task_count[h] > 0 ? hosts[h].cost_rate * interval_seconds / 3600.0 : 0.0;
  }
  return out;
}

}  // namespace edgesched
