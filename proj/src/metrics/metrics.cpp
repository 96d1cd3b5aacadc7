#include "edgesched/metrics/metrics.hpp"

#include <algorithm>

#include "edgesched/core/errors.hpp"

namespace edgesched {

namespace {

// x/0 is treated as the limit of a ratio that is then clipped to [0,1].
double clipped_ratio(double num, double den) {
  if (den > 0.0) return std::clamp(num / den, 0.0, 1.0);
  return num > 0.0 ? 1.0 : 0.0;
}

}  // namespace

void RunningNormalizers::update(const IntervalOutcome& outcome) {
  for (const auto& c : outcome.completed) max_response_time = std::max(max_response_time, c.response_time);
  for (double m : outcome.task_migration_times) max_migration_time = std::max(max_migration_time, m);
}

double aec(const IntervalOutcome& outcome, const std::vector<Host>& hosts, double interval_seconds) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    num += hosts[h].energy_weight * outcome.energy_joules.at(h);
    den += hosts[h].energy_weight * hosts[h].max_power() * interval_seconds;
  }
  if (!(den > 0.0)) throw DomainError("energy normalizer is zero (all energy weights are 0)");
  return std::clamp(num / den, 0.0, 1.0);
}

double art(const IntervalOutcome& outcome, const RunningNormalizers& norms) {
  if (outcome.completed.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : outcome.completed) sum += c.response_time;
  return clipped_ratio(sum / static_cast<double>(outcome.completed.size()), norms.max_response_time);
}

double amt(const IntervalOutcome& outcome, int active_count, const RunningNormalizers& norms) {
  if (active_count <= 0) return 0.0;
  double sum = 0.0;
  for (double m : outcome.task_migration_times) sum += m;
  if (sum == 0.0) return 0.0;
  return clipped_ratio(sum / active_count, norms.max_response_time);
}

double cost(const IntervalOutcome& outcome, const std::vector<Host>& hosts, double interval_seconds) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    num += outcome.cost.at(h);
    den += hosts[h].cost_rate * interval_seconds / 3600.0;
  }
  return clipped_ratio(num, den);
}

double sla_violation(const CompletedTask& task) {
  const double life = task.lifetime();
  if (!(life > 0.0)) return 0.0;
  return std::clamp((task.throttled_time / life) * (task.migration_time / life), 0.0, 1.0);
}

double slav(const IntervalOutcome& outcome) {
  if (outcome.completed.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : outcome.completed) sum += sla_violation(c);
  return std::clamp(sum / static_cast<double>(outcome.completed.size()), 0.0, 1.0);
}

double composite_loss(const IntervalMetrics& m, const Hyperparams& hp) {
  return hp.alpha * m.aec + hp.beta * m.art + hp.gamma * m.amt + hp.delta * m.cost +
         hp.epsilon * m.slav;
}

IntervalMetrics compute_metrics(const IntervalOutcome& outcome, const std::vector<Host>& hosts,
                                double interval_seconds, const Hyperparams& hp,
                                RunningNormalizers& norms) {
  norms.update(outcome);
  IntervalMetrics m;
  m.aec = aec(outcome, hosts, interval_seconds);
  m.art = art(outcome, norms);
  m.amt = amt(outcome, outcome.active_count, norms);
  m.cost = cost(outcome, hosts, interval_seconds);
  m.slav = slav(outcome);
  m.loss = composite_loss(m, hp);
  return m;
}

}  // namespace edgesched
