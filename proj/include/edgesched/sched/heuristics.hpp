#pragma once

#include <span>

#include "edgesched/sched/scheduler.hpp"

namespace edgesched::sched {

struct HeuristicOptions {
  std::size_t window = 10;
  double lr_safety = 1.2;
  double mad_scale = 2.5;
};

/// Robust local regression: tricube-weighted least squares on the series
/// against its index, refit once with bisquare weights, extrapolated one step.
/// Needs at least two points.
double local_regression_forecast(std::span<const double> series);

double median(std::vector<double> values);
double median_absolute_deviation(std::span<const double> series);

/// Pearson correlation; 0 when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Best-fit-decreasing placement: `to_place` by decreasing CPU demand, each onto
/// the suitable host (not in `excluded`) whose power draw rises least.
/// `stay` tasks keep their hosts. Unplaceable new tasks are deferred and
/// unplaceable continuing tasks stay where they are.
csm::ConstrainedAction bfd_place(const DecisionContext& ctx, const std::vector<TaskId>& to_place,
                                 const std::vector<bool>& excluded);

class LrMmtScheduler final : public Scheduler {
 public:
  explicit LrMmtScheduler(HeuristicOptions opts = {}) : opts_(opts) {}
  std::string name() const override { return "lr-mmt"; }
  Decision decide(const DecisionContext& ctx) override;

  /// True when the host's forecast utilization times the safety factor exceeds 1.
  bool overloaded(std::span<const double> history) const;

 private:
  HeuristicOptions opts_;
};

class MadMcScheduler final : public Scheduler {
 public:
  explicit MadMcScheduler(HeuristicOptions opts = {}) : opts_(opts) {}
  std::string name() const override { return "mad-mc"; }
  Decision decide(const DecisionContext& ctx) override;

  double threshold(std::span<const double> history) const;

 private:
  HeuristicOptions opts_;
};

}  // namespace edgesched::sched
