#include "edgesched/sched/scheduler.hpp"

namespace edgesched::sched {

void History::record_host(std::size_t host, double utilization) {
  if (host_utilization.size() <= host) host_utilization.resize(host + 1);
  auto& q = host_utilization[host];
  q.push_back(utilization);
  while (q.size() > window) q.pop_front();
}

void History::record_task(TaskId task, double mips) {
  auto& q = task_cpu[task];
  q.push_back(mips);
  while (q.size() > window) q.pop_front();
}

std::vector<TaskId> row_tasks(const DecisionContext& ctx) {
  if (ctx.state) return ctx.state->row_tasks;
  std::vector<TaskId> rows;
  for (TaskId id : ctx.sets->continuing()) rows.push_back(id);
  for (TaskId id : ctx.sets->arriving) rows.push_back(id);
  return rows;
}

}  // namespace edgesched::sched
