#pragma once

// Straight-line transcription of the five interval metrics and random outcome
// fixtures for comparing against the library. Shares no code with src/metrics.

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "edgesched/core/host_table.hpp"
#include "edgesched/metrics/metrics.hpp"
#include "edgesched/sim/power.hpp"

namespace testsupport {

struct OracleMetrics {
  double aec, art, amt, cost, slav, loss;
};

inline double clip01(double v) { return v < 0 ? 0 : (v > 1 ? 1 : v); }

/// `max_response` is the running maximum before this interval.
inline OracleMetrics oracle_metrics(const edgesched::IntervalOutcome& o, const std::vector<edgesched::Host>& hosts,
                                    double T, const std::array<double, 5>& w, double max_response) {
  OracleMetrics m{};
  double e_num = 0, e_den = 0;
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    e_num = e_num + hosts[h].energy_weight * o.energy_joules[h];
    e_den = e_den + hosts[h].energy_weight * hosts[h].power_curve[10] * T;
  }
  m.aec = clip01(e_num / e_den);

  for (const auto& c : o.completed)
    if (c.response_time > max_response) max_response = c.response_time;

  if (o.completed.empty()) {
    m.art = 0;
  } else {
    double s = 0;
    for (const auto& c : o.completed) s = s + c.response_time;
    const double mean = s / double(o.completed.size());
    m.art = max_response > 0 ? clip01(mean / max_response) : (mean > 0 ? 1 : 0);
  }

  double mig = 0;
  for (double t : o.task_migration_times) mig = mig + t;
  if (o.active_count == 0 || mig == 0) {
    m.amt = 0;
  } else {
    const double mean = mig / double(o.active_count);
    m.amt = max_response > 0 ? clip01(mean / max_response) : 1;
  }

  double c_num = 0, c_den = 0;
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    c_num = c_num + o.cost[h];
    c_den = c_den + hosts[h].cost_rate * T / 3600.0;
  }
  m.cost = c_den > 0 ? clip01(c_num / c_den) : (c_num > 0 ? 1 : 0);

  if (o.completed.empty()) {
    m.slav = 0;
  } else {
    double s = 0;
    for (const auto& c : o.completed) {
      const double life = c.completion_time - c.arrival_time;
      if (life > 0) s = s + clip01((c.throttled_time / life) * (c.migration_time / life));
    }
    m.slav = clip01(s / double(o.completed.size()));
  }
  m.loss = w[0] * m.aec + w[1] * m.art + w[2] * m.amt + w[3] * m.cost + w[4] * m.slav;
  return m;
}

/// A random but physically plausible interval outcome on `hosts`.
inline edgesched::IntervalOutcome random_outcome(std::mt19937_64& rng, const std::vector<edgesched::Host>& hosts,
                                                 double T, int interval) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  edgesched::IntervalOutcome o;
  for (const auto& h : hosts) {
    const double util = u(rng) < 0.2 ? 0.0 : u(rng);
    o.utilization.push_back(util);
    o.energy_joules.push_back(edgesched::interpolate_power(h, util) * T);
    o.cost.push_back(u(rng) < 0.3 ? 0.0 : h.cost_rate * T / 3600.0);
  }
  o.active_count = static_cast<int>(rng() % 20);
  for (int i = 0; i < o.active_count; ++i) o.task_migration_times.push_back(u(rng) < 0.7 ? 0.0 : 100 * u(rng));
  o.migration_count = static_cast<int>(std::count_if(o.task_migration_times.begin(), o.task_migration_times.end(),
                                                     [](double t) { return t > 0; }));
  const int leaving = static_cast<int>(rng() % 6);
  for (int i = 0; i < leaving; ++i) {
    edgesched::CompletedTask c;
    c.id = i;
    c.arrival_time = T * (interval - 1 - static_cast<int>(rng() % 8));
    c.completion_time = T * interval + T * u(rng);
    const double life = c.completion_time - c.arrival_time;
    c.response_time = life * (0.5 + 0.5 * u(rng));
    c.throttled_time = u(rng) < 0.5 ? 0.0 : life * u(rng);
    c.migration_time = life * 0.3 * u(rng);
    c.total_duration = life * 0.8;
    o.completed.push_back(c);
  }
  return o;
}

/// Host list with random energy weights, drawn from the reference types.
inline std::vector<edgesched::Host> random_hosts(std::mt19937_64& rng) {
  auto types = edgesched::reference_host_types();
  for (auto& t : types) t.count = 1 + static_cast<int>(rng() % 3);
  auto hosts = edgesched::instantiate_hosts(types);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& h : hosts) h.energy_weight = 0.05 + 0.95 * u(rng);
  return hosts;
}

}  // namespace testsupport
