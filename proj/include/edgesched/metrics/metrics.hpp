#pragma once

#include <vector>

#include "edgesched/core/model.hpp"
#include "edgesched/sim/simulator.hpp"

namespace edgesched {

/// The five normalized interval metrics and their weighted combination.
struct IntervalMetrics {
  double aec = 0.0;
  double art = 0.0;
  double amt = 0.0;
  double cost = 0.0;
  double slav = 0.0;
  double loss = 0.0;

  friend bool operator==(const IntervalMetrics&, const IntervalMetrics&) = default;
};

/// Running maxima used to normalize response and migration time.
struct RunningNormalizers {
  double max_response_time = 0.0;
  double max_migration_time = 0.0;

  // Folds in the leaving tasks' response times and this interval's migrations.
  void update(const IntervalOutcome& outcome);
};

/// Energy weighted by alpha_h over the weighted energy at peak power.
/// Throws DomainError when every alpha_h is zero.
double aec(const IntervalOutcome& outcome, const std::vector<Host>& hosts, double interval_seconds);

/// Mean response time of leaving tasks over the running max; 0 without leavers.
double art(const IntervalOutcome& outcome, const RunningNormalizers& norms);

/// Mean migration time over active tasks, normalized by the running max
/// response time and clipped to [0,1]; 0 without migrations.
double amt(const IntervalOutcome& outcome, int active_count, const RunningNormalizers& norms);

/// Incurred cost over the cost of billing every host for the whole interval.
double cost(const IntervalOutcome& outcome, const std::vector<Host>& hosts, double interval_seconds);

/// Per-task SLA violation: throttled share of its lifetime times its migrating share.
double sla_violation(const CompletedTask& task);

/// Mean SLA violation over leaving tasks; 0 without leavers.
double slav(const IntervalOutcome& outcome);

double composite_loss(const IntervalMetrics& m, const Hyperparams& hp);

/// Updates `norms` with this interval, then evaluates all five metrics and the loss.
IntervalMetrics compute_metrics(const IntervalOutcome& outcome, const std::vector<Host>& hosts,
                                double interval_seconds, const Hyperparams& hp,
                                RunningNormalizers& norms);

}  // namespace edgesched
