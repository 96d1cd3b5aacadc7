#include "edgesched/sched/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "edgesched/core/errors.hpp"
#include "edgesched/sim/power.hpp"

namespace edgesched::sched {

namespace {

struct Line {
  double a = 0.0;
  double b = 0.0;
};

// Weighted least squares of y on x = 0..k-1; false when the system is singular.
bool weighted_fit(std::span<const double> y, const std::vector<double>& w, Line& out) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i);
    sw += w[i];
    sx += w[i] * x;
    sy += w[i] * y[i];
    sxx += w[i] * x * x;
    sxy += w[i] * x * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(sw > 0.0) || std::abs(det) < 1e-12) return false;
  out.b = (sw * sxy - sx * sy) / det;
  out.a = (sy - out.b * sx) / sw;
  return true;
}

std::vector<double> as_vector(const std::deque<double>& q) { return {q.begin(), q.end()}; }

const Task& task_at(const DecisionContext& ctx, TaskId id) {
  const auto it = ctx.tasks->find(id);
  if (it == ctx.tasks->end()) throw InvariantViolation("unknown task " + std::to_string(id));
  return it->second;
}

struct HostLoad {
  Resources load;
  std::vector<TaskId> tasks;       // every continuing task on the host
  std::vector<TaskId> migratable;  // the subset that may move
};

std::vector<HostLoad> continuing_loads(const DecisionContext& ctx) {
  std::vector<HostLoad> hosts(ctx.hosts->size());
  for (TaskId id : ctx.sets->continuing()) {
    const Task& t = task_at(ctx, id);
    if (!t.assigned_host) throw InvariantViolation("continuing task without a host");
    auto& h = hosts.at(static_cast<std::size_t>(*t.assigned_host));
    h.load += t.demand;
    h.tasks.push_back(id);
    if (ctx.sets->migratable.contains(id)) h.migratable.push_back(id);
  }
  return hosts;
}

std::span<const double> host_series(const DecisionContext& ctx, std::size_t h, std::vector<double>& buf) {
  buf.clear();
  if (ctx.history && h < ctx.history->host_utilization.size()) {
    buf = as_vector(ctx.history->host_utilization[h]);
  }
  return buf;
}

std::vector<double> task_series(const DecisionContext& ctx, TaskId id) {
  if (!ctx.history) return {};
  const auto it = ctx.history->task_cpu.find(id);
  return it == ctx.history->task_cpu.end() ? std::vector<double>{} : as_vector(it->second);
}

// Shared skeleton: pick tasks off flagged hosts with `select` until `relieved`,
// then place them together with the new tasks.
Decision overload_then_bfd(
    const DecisionContext& ctx, const std::function<bool(std::size_t)>& detector,
    const std::function<bool(std::size_t, const Resources& remaining)>& relieved,
    const std::function<TaskId(std::size_t, const std::vector<TaskId>& candidates,
                               const std::vector<TaskId>& staying)>& select) {
  const auto& hosts = *ctx.hosts;
  auto loads = continuing_loads(ctx);
  std::vector<bool> overloaded(hosts.size(), false);
  std::vector<TaskId> to_place;

  for (std::size_t h = 0; h < hosts.size(); ++h) {
    const bool over_capacity = !loads[h].load.fits_within(hosts[h].capacity);
    if (!over_capacity && !detector(h)) continue;
    overloaded[h] = true;
    Resources remaining = loads[h].load;
    std::vector<TaskId> candidates = loads[h].migratable;
    std::vector<TaskId> staying = loads[h].tasks;
    while (!candidates.empty() &&
           !(relieved(h, remaining) && remaining.fits_within(hosts[h].capacity))) {
      const TaskId pick = select(h, candidates, staying);
      candidates.erase(std::find(candidates.begin(), candidates.end(), pick));
      staying.erase(std::find(staying.begin(), staying.end(), pick));
      remaining -= task_at(ctx, pick).demand;
      to_place.push_back(pick);
    }
  }
  for (TaskId id : ctx.sets->arriving) to_place.push_back(id);
  return bfd_place(ctx, to_place, overloaded);
}

}  // namespace

double local_regression_forecast(std::span<const double> series) {
  const std::size_t k = series.size();
  if (k < 2) throw DomainError("local regression needs at least two points");
  std::vector<double> w(k);
  const double span_len = static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double d = static_cast<double>(k - 1 - i) / span_len;
    w[i] = std::pow(1.0 - d * d * d, 3);
  }
  Line fit;
  if (!weighted_fit(series, w, fit)) return series.back();

  std::vector<double> resid(k);
  for (std::size_t i = 0; i < k; ++i) resid[i] = std::abs(series[i] - (fit.a + fit.b * static_cast<double>(i)));
  const double s = median(resid);
  if (s > 0.0) {
    std::vector<double> rw(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double u = resid[i] / (6.0 * s);
      rw[i] = u < 1.0 ? w[i] * (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
    Line robust;
    if (weighted_fit(series, rw, robust)) fit = robust;
  }
  return fit.a + fit.b * static_cast<double>(k);
}

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of an empty series");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double median_absolute_deviation(std::span<const double> series) {
  const double med = median({series.begin(), series.end()});
  std::vector<double> dev;
  dev.reserve(series.size());
  for (double x : series) dev.push_back(std::abs(x - med));
  return median(std::move(dev));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  // Align on the most recent n samples.
  a = a.subspan(a.size() - n);
  b = b.subspan(b.size() - n);
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

csm::ConstrainedAction bfd_place(const DecisionContext& ctx, const std::vector<TaskId>& to_place,
                                 const std::vector<bool>& excluded) {
  const auto& hosts = *ctx.hosts;
  const std::size_t n = hosts.size();
  const std::set<TaskId> moving(to_place.begin(), to_place.end());

  std::vector<Resources> load(n);
  for (TaskId id : ctx.sets->continuing()) {
    if (moving.contains(id)) continue;
    const Task& t = task_at(ctx, id);
    load.at(static_cast<std::size_t>(*t.assigned_host)) += t.demand;
  }

  auto role_of = [&](TaskId id) {
    if (ctx.sets->arriving.contains(id)) return csm::Role::New;
    if (ctx.sets->migratable.contains(id)) return csm::Role::Migratable;
    return csm::Role::Blocked;
  };

  std::map<TaskId, csm::Placement> placed;
  std::vector<TaskId> order = to_place;
  std::stable_sort(order.begin(), order.end(), [&](TaskId a, TaskId b) {
    const double ca = task_at(ctx, a).demand.cpu_mips;
    const double cb = task_at(ctx, b).demand.cpu_mips;
    return ca != cb ? ca > cb : a < b;
  });

  for (TaskId id : order) {
    const Task& t = task_at(ctx, id);
    csm::Placement p;
    p.task = id;
    p.role = role_of(id);
    if (p.role == csm::Role::Blocked) throw InvariantViolation("heuristic tried to move a blocked task");
    std::optional<std::size_t> best;
    double best_delta = 0.0;
    for (std::size_t h = 0; h < n; ++h) {
      if (excluded[h] || !is_suitable(hosts[h], t, load[h])) continue;
      const double cap = hosts[h].capacity.cpu_mips;
      const double before = interpolate_power(hosts[h], std::min(1.0, load[h].cpu_mips / cap));
      const double after =
          interpolate_power(hosts[h], std::min(1.0, (load[h].cpu_mips + t.demand.cpu_mips) / cap));
      const double delta = after - before;
      if (!best || delta < best_delta) {
        best = h;
        best_delta = delta;
      }
    }
    if (best) {
      p.host = static_cast<HostId>(*best);
      load[*best] += t.demand;
    } else {
      p.rank = static_cast<int>(n);
      if (p.role == csm::Role::Migratable) {
        p.host = *t.assigned_host;
        p.fallback = true;
        load[static_cast<std::size_t>(*t.assigned_host)] += t.demand;
      }
    }
    placed[id] = p;
  }

  csm::ConstrainedAction action;
  action.host_count = n;
  for (TaskId id : ctx.sets->active) {
    if (const auto it = placed.find(id); it != placed.end()) {
      action.placements.push_back(it->second);
      continue;
    }
    csm::Placement p;
    p.task = id;
    p.role = role_of(id);
    if (p.role == csm::Role::New) throw InvariantViolation("new task left unplaced");
    p.host = *task_at(ctx, id).assigned_host;
    action.placements.push_back(p);
  }
  return action;
}

bool LrMmtScheduler::overloaded(std::span<const double> history) const {
  if (history.size() < 2) return false;
  const auto tail = history.subspan(history.size() - std::min(history.size(), opts_.window));
  return opts_.lr_safety * local_regression_forecast(tail) > 1.0;
}

Decision LrMmtScheduler::decide(const DecisionContext& ctx) {
  const auto& hosts = *ctx.hosts;
  const auto loads = continuing_loads(ctx);
  std::vector<double> forecast(hosts.size(), 0.0);
  std::vector<bool> detected(hosts.size(), false);
  std::vector<double> buf;
  auto detector = [&](std::size_t h) {
    const auto series = host_series(ctx, h, buf);
    if (!overloaded(series)) return false;
    const auto tail = series.subspan(series.size() - std::min(series.size(), opts_.window));
    forecast[h] = local_regression_forecast(tail);
    detected[h] = true;
    return true;
  };
  // Hosts flagged only for being over capacity are relieved once they fit.
  auto relieved = [&](std::size_t h, const Resources& remaining) {
    if (!detected[h]) return true;
    const double cap = hosts[h].capacity.cpu_mips;
    const double removed = loads[h].load.cpu_mips - remaining.cpu_mips;
    const double predicted = std::max(forecast[h], loads[h].load.cpu_mips / cap) - removed / cap;
    return opts_.lr_safety * predicted <= 1.0;
  };
  // Minimum migration time: the smallest memory image moves first.
  auto select = [&](std::size_t, const std::vector<TaskId>& candidates, const std::vector<TaskId>&) {
    return *std::min_element(candidates.begin(), candidates.end(), [&](TaskId a, TaskId b) {
      const double ra = task_at(ctx, a).demand.ram_mb;
      const double rb = task_at(ctx, b).demand.ram_mb;
      return ra != rb ? ra < rb : a < b;
    });
  };
  return overload_then_bfd(ctx, detector, relieved, select);
}

double MadMcScheduler::threshold(std::span<const double> history) const {
  if (history.empty()) return 1.0;
  const auto tail = history.subspan(history.size() - std::min(history.size(), opts_.window));
  return 1.0 - opts_.mad_scale * median_absolute_deviation(tail);
}

Decision MadMcScheduler::decide(const DecisionContext& ctx) {
  const auto& hosts = *ctx.hosts;
  const auto loads = continuing_loads(ctx);
  std::vector<double> limit(hosts.size(), 1.0);
  std::vector<double> buf;
  for (std::size_t h = 0; h < hosts.size(); ++h) limit[h] = threshold(host_series(ctx, h, buf));

  auto detector = [&](std::size_t h) {
    return loads[h].load.cpu_mips / hosts[h].capacity.cpu_mips > limit[h];
  };
  auto relieved = [&](std::size_t h, const Resources& remaining) {
    return remaining.cpu_mips / hosts[h].capacity.cpu_mips <= std::max(limit[h], 0.0);
  };
  // Maximum correlation with the rest of the host's load.
  auto select = [&](std::size_t, const std::vector<TaskId>& candidates, const std::vector<TaskId>& staying) {
    if (candidates.size() == 1) return candidates.front();
    TaskId best = candidates.front();
    double best_corr = -2.0;
    for (TaskId c : candidates) {
      const auto mine = task_series(ctx, c);
      std::vector<double> others(mine.size(), 0.0);
      for (TaskId o : staying) {
        if (o == c) continue;
        const auto s = task_series(ctx, o);
        // Right-align: index from the most recent sample backwards.
        for (std::size_t i = 1; i <= std::min(s.size(), others.size()); ++i) {
          others[others.size() - i] += s[s.size() - i];
        }
      }
      const double corr = pearson(mine, others);
      if (corr > best_corr) {
        best = c;
        best_corr = corr;
      }
    }
    return best;
  };
  return overload_then_bfd(ctx, detector, relieved, select);
}

}  // namespace edgesched::sched
