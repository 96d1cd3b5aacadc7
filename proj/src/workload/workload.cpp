#include "edgesched/workload/workload.hpp"

#include <algorithm>
#include <cmath>

#include "edgesched/core/errors.hpp"

namespace edgesched {

void ArrivalModel::validate() const {
  if (!(mean_new > 0.0) || !(mean_duration > 0.0)) {
    throw ValidationError("arrival means must be positive");
  }
  if (std_new < 0.0 || std_duration < 0.0) {
    throw ValidationError("arrival deviations must be non-negative");
  }
}

int clamp_count_draw(double draw) {
  if (!(draw > 0.0)) return 0;
  return static_cast<int>(std::lround(draw));
}

WorkloadGenerator::WorkloadGenerator(ArrivalModel arrivals, SyntheticDemandModel demand,
                                     double interval_seconds)
    : arrivals_(arrivals),
      demand_(demand),
      interval_seconds_(interval_seconds),
      rng_(arrivals.seed) {
  arrivals_.validate();
}

WorkloadGenerator::WorkloadGenerator(ArrivalModel arrivals,
                                     std::vector<std::shared_ptr<const DemandProfile>> traces,
                                     double interval_seconds)
    : arrivals_(arrivals),
      interval_seconds_(interval_seconds),
      traces_(std::move(traces)),
      rng_(arrivals.seed) {
  arrivals_.validate();
  if (traces_.empty()) throw ValidationError("trace-driven workload needs at least one trace");
  for (const auto& t : traces_) {
    if (!t || t->empty()) throw ValidationError("trace-driven workload got an empty trace");
  }
}

std::vector<Task> WorkloadGenerator::generate_new_tasks(int interval, int current_active,
                                                        int max_tasks) {
  if (current_active > max_tasks) {
    throw InvariantViolation("active task count already exceeds max_tasks");
  }
  const int drawn =
      clamp_count_draw(std::normal_distribution<double>(arrivals_.mean_new, arrivals_.std_new)(rng_));
  const int count = std::min(max_tasks - current_active, drawn);

  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    Task t;
    t.id = next_id_++;
    t.created_at = interval;
    const double d = std::normal_distribution<double>(arrivals_.mean_duration,
                                                      arrivals_.std_duration)(rng_);
    t.total_duration = std::max(d, interval_seconds_);
    t.expected_completion = t.total_duration;
    if (traces_.empty()) {
      t.profile = synthesize_profile(t.total_duration);
    } else {
      t.profile = traces_[next_trace_];
      next_trace_ = (next_trace_ + 1) % traces_.size();
    }
    t.demand = t.profile->front();
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::shared_ptr<const DemandProfile> WorkloadGenerator::synthesize_profile(double duration) {
  auto uniform = [this](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  };
  const Resources base{uniform(demand_.min_base.cpu_mips, demand_.max_base.cpu_mips),
                       uniform(demand_.min_base.ram_mb, demand_.max_base.ram_mb),
                       uniform(demand_.min_base.net_bw_mbps, demand_.max_base.net_bw_mbps),
                       uniform(demand_.min_base.disk_bw_mbps, demand_.max_base.disk_bw_mbps)};
  // Throttled tasks outlive this horizon and hold the last sample.
  const auto length = static_cast<std::size_t>(std::ceil(duration / interval_seconds_)) + 1;
  auto profile = std::make_shared<DemandProfile>();
  profile->reserve(length);
  std::normal_distribution<double> step(0.0, demand_.walk_sigma);
  double m = 1.0;
  double m_ram = 1.0;
  for (std::size_t k = 0; k < length; ++k) {
    if (k > 0) {
      m = std::clamp(m + step(rng_), demand_.walk_low, demand_.walk_high);
      m_ram = std::clamp(m_ram + 0.5 * step(rng_), demand_.walk_low, demand_.walk_high);
    }
    profile->push_back({base.cpu_mips * m, base.ram_mb * m_ram, base.net_bw_mbps * m,
                        base.disk_bw_mbps * m});
  }
  return profile;
}

std::shared_ptr<const DemandProfile> profile_from_trace(const TraceStream& stream) {
  auto profile = std::make_shared<DemandProfile>();
  profile->reserve(stream.size());
  for (const auto& r : stream) profile->push_back(r.to_demand());
  return profile;
}

Resources sample_demand(const Task& task, int interval_index) {
  const int offset = interval_index - task.created_at;
  if (offset < 0) {
    throw InvariantViolation("demand sampled before task " + std::to_string(task.id) +
                             " was created");
  }
  if (!task.profile || task.profile->empty()) return task.demand;
  const auto idx = std::min(static_cast<std::size_t>(offset), task.profile->size() - 1);
  return (*task.profile)[idx];
}

}  // namespace edgesched
