#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "edgesched/core/model.hpp"
#include "edgesched/workload/trace.hpp"

namespace edgesched {

/// Normal arrival counts and durations, N(mean_new, std_new^2) and
/// N(mean_duration, std_duration^2).
struct ArrivalModel {
  double mean_new = 12.0;
  double std_new = 5.0;
  double mean_duration = 1800.0;  // seconds
  double std_duration = 300.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parameters of the random-walk demand synthesizer used when no trace is bound.
struct SyntheticDemandModel {
  Resources min_base{200.0, 512.0, 2.0, 2.0};
  Resources max_base{800.0, 2048.0, 20.0, 12.0};
  double walk_sigma = 0.15;  // per-interval step of the multiplicative walk
  double walk_low = 0.3;
  double walk_high = 1.8;
};

/// Rounds a normal draw for a task count: negatives become 0.
int clamp_count_draw(double draw);

/// Stochastic task source. Owns its RNG; one instance per simulation replica.
class WorkloadGenerator {
 public:
  WorkloadGenerator(ArrivalModel arrivals, SyntheticDemandModel demand, double interval_seconds);

  /// Trace-driven: profiles are bound to new tasks round-robin.
  WorkloadGenerator(ArrivalModel arrivals, std::vector<std::shared_ptr<const DemandProfile>> traces,
                    double interval_seconds);

  /// Creates min(max_tasks - current_active, round(N(mu_n, sigma_n^2))) tasks
  /// stamped with `interval`. Task ids are never reused.
  std::vector<Task> generate_new_tasks(int interval, int current_active, int max_tasks);

  bool trace_driven() const { return !traces_.empty(); }

 private:
  std::shared_ptr<const DemandProfile> synthesize_profile(double duration);

  ArrivalModel arrivals_;
  SyntheticDemandModel demand_;
  double interval_seconds_;
  std::vector<std::shared_ptr<const DemandProfile>> traces_;
  std::size_t next_trace_ = 0;
  std::mt19937_64 rng_;
  TaskId next_id_ = 0;
};

/// Builds a demand profile from a trace stream.
std::shared_ptr<const DemandProfile> profile_from_trace(const TraceStream& stream);

/// The task's demand in `interval_index`: its profile at offset
/// (interval_index - created_at), holding the last entry once exhausted.
Resources sample_demand(const Task& task, int interval_index);

}  // namespace edgesched
