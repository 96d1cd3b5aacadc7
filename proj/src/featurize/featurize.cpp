#include "edgesched/featurize/featurize.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/text.hpp"
#include "edgesched/sim/power.hpp"

namespace edgesched {

int StateShape::input_size() const {
  return hosts * kHostFeatures + max_tasks * (kTaskFeatures + hosts) + max_tasks * kTaskFeatures;
}

const std::vector<std::string>& host_feature_names() {
  static const std::vector<std::string> names = {
      "host_cpu_util",   "host_ram_util",   "host_net_util",   "host_disk_util",
      "host_mips",       "host_ram_cap",    "host_net_cap",    "host_disk_cap",
      "host_idle_power", "host_max_power",  "host_power_now",  "host_cost_rate",
      "host_response_time", "host_task_count"};
  return names;
}

const std::vector<std::string>& new_task_feature_names() {
  static const std::vector<std::string> names = {"new_cpu", "new_ram", "new_net", "new_disk"};
  return names;
}

const std::vector<std::string>& continuing_task_feature_names() {
  static const std::vector<std::string> names = {"cont_cpu", "cont_ram", "cont_net", "cont_disk"};
  return names;
}

Eigen::VectorXd StateMatrices::flatten() const {
  Eigen::VectorXd v(hosts.size() + continuing.size() + new_tasks.size());
  Eigen::Index k = 0;
  auto append = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) v[k++] = m(r, c);
  };
  append(hosts);
  append(continuing);
  append(new_tasks);
  return v;
}

void MinMaxTable::set(const std::string& feature, double min, double max) {
  if (!(max >= min)) throw ValidationError("feature " + feature + ": max below min");
  ranges_[feature] = {min, max};
}

std::pair<double, double> MinMaxTable::range(const std::string& feature) const {
  const auto it = ranges_.find(feature);
  if (it == ranges_.end()) throw ValidationError("no normalization range for feature " + feature);
  return it->second;
}

void MinMaxTable::write(std::ostream& out) const {
  out << "# feature min max\n";
  for (const auto& [f, r] : ranges_) {
    out << f << ' ' << text::format_double(r.first) << ' ' << text::format_double(r.second) << '\n';
  }
}

MinMaxTable MinMaxTable::read(std::istream& in) {
  MinMaxTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::istringstream fields(s);
    std::vector<std::string> cells;
    for (std::string c; fields >> c;) cells.push_back(c);
    if (cells.size() != 3) {
      throw ParseError("normalization table line " + std::to_string(line_no) +
                       ": expected 'feature min max'");
    }
    const std::string w = "normalization table line " + std::to_string(line_no);
    t.set(cells[0], text::parse_double(cells[1], w), text::parse_double(cells[2], w));
  }
  return t;
}

void MinMaxTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  write(out);
}

MinMaxTable MinMaxTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open normalization table " + path.string());
  return read(in);
}

double standardize(double value, const std::string& feature, const MinMaxTable& table) {
  const auto [lo, hi] = table.range(feature);
  if (hi == lo) return 0.0;
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

namespace {

void put_demand(Eigen::MatrixXd& m, Eigen::Index row, const Resources& d) {
  m(row, 0) = d.cpu_mips;
  m(row, 1) = d.ram_mb;
  m(row, 2) = d.net_bw_mbps;
  m(row, 3) = d.disk_bw_mbps;
}

double ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }

}  // namespace

StateMatrices build_raw_state(const std::vector<Host>& hosts, const TaskMap& tasks,
                              const TaskSets& sets, const StateShape& shape) {
  const int n = shape.hosts;
  if (static_cast<int>(hosts.size()) != n) {
    throw InvariantViolation("state shape expects " + std::to_string(n) + " hosts");
  }
  const auto continuing = sets.continuing();
  const int c = static_cast<int>(continuing.size());
  const int k = static_cast<int>(sets.arriving.size());
  if (c + k > shape.max_tasks) throw InvariantViolation("more active tasks than max_tasks");

  StateMatrices s;
  s.hosts = Eigen::MatrixXd::Zero(n, kHostFeatures);
  s.new_tasks = Eigen::MatrixXd::Zero(shape.max_tasks, kTaskFeatures);
  s.continuing = Eigen::MatrixXd::Zero(shape.max_tasks, kTaskFeatures + n);
  s.continuing_count = c;
  s.new_count = k;

  std::vector<Resources> load(static_cast<std::size_t>(n));
  std::vector<int> count(static_cast<std::size_t>(n), 0);
  auto task_at = [&](TaskId id) -> const Task& {
    const auto it = tasks.find(id);
    if (it == tasks.end()) throw InvariantViolation("state references unknown task " + std::to_string(id));
    return it->second;
  };

  Eigen::Index row = 0;
  for (TaskId id : continuing) {
    const Task& t = task_at(id);
    if (!t.assigned_host || *t.assigned_host < 0 || *t.assigned_host >= n) {
      throw InvariantViolation("task " + std::to_string(id) + " references a missing host");
    }
    const auto h = static_cast<std::size_t>(*t.assigned_host);
    load[h] += t.demand;
    ++count[h];
    put_demand(s.continuing, row, t.demand);
    s.continuing(row, kTaskFeatures + *t.assigned_host) = 1.0;
    s.row_tasks.push_back(id);
    ++row;
  }
  for (TaskId id : sets.arriving) {
    put_demand(s.new_tasks, row, task_at(id).demand);
    s.row_tasks.push_back(id);
    ++row;
  }

  for (int h = 0; h < n; ++h) {
    const Host& host = hosts[static_cast<std::size_t>(h)];
    const Resources& l = load[static_cast<std::size_t>(h)];
    const double cpu_util = ratio(l.cpu_mips, host.capacity.cpu_mips);
    const double vals[kHostFeatures] = {
        cpu_util,
        ratio(l.ram_mb, host.capacity.ram_mb),
        ratio(l.net_bw_mbps, host.capacity.net_bw_mbps),
        ratio(l.disk_bw_mbps, host.capacity.disk_bw_mbps),
        host.capacity.cpu_mips,
        host.capacity.ram_mb,
        host.capacity.net_bw_mbps,
        host.capacity.disk_bw_mbps,
        host.idle_power(),
        host.max_power(),
        interpolate_power(host, std::min(cpu_util, 1.0)),
        host.cost_rate,
        host.response_time,
        static_cast<double>(count[static_cast<std::size_t>(h)])};
    for (int f = 0; f < kHostFeatures; ++f) s.hosts(h, f) = vals[f];
  }
  return s;
}

StateMatrices standardize_state(const StateMatrices& raw, const MinMaxTable& table) {
  StateMatrices s = raw;
  const auto& hn = host_feature_names();
  for (Eigen::Index r = 0; r < s.hosts.rows(); ++r)
    for (int f = 0; f < kHostFeatures; ++f) s.hosts(r, f) = standardize(raw.hosts(r, f), hn[f], table);

  const auto& cn = continuing_task_feature_names();
  for (Eigen::Index r = 0; r < raw.continuing_count; ++r) {
    for (int f = 0; f < kTaskFeatures; ++f) s.continuing(r, f) = standardize(raw.continuing(r, f), cn[f], table);
    for (Eigen::Index c = kTaskFeatures; c < s.continuing.cols(); ++c) {
      s.continuing(r, c) = standardize(raw.continuing(r, c), kPrevHostFeature, table);
    }
  }
  const auto& nn = new_task_feature_names();
  for (Eigen::Index r = raw.continuing_count; r < raw.continuing_count + raw.new_count; ++r)
    for (int f = 0; f < kTaskFeatures; ++f) s.new_tasks(r, f) = standardize(raw.new_tasks(r, f), nn[f], table);
  return s;
}

StateMatrices build_state(const std::vector<Host>& hosts, const TaskMap& tasks,
                          const TaskSets& sets, const MinMaxTable& table,
                          const StateShape& shape) {
  return standardize_state(build_raw_state(hosts, tasks, sets, shape), table);
}

MinMaxTable fit_minmax(std::span<const StateMatrices> samples) {
  if (samples.empty()) throw ValidationError("cannot fit normalization on an empty sample");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::map<std::string, std::pair<double, double>> acc;
  auto see = [&](const std::string& f, double v) {
    auto [it, inserted] = acc.try_emplace(f, inf, -inf);
    it->second.first = std::min(it->second.first, v);
    it->second.second = std::max(it->second.second, v);
  };
  const auto& hn = host_feature_names();
  const auto& cn = continuing_task_feature_names();
  const auto& nn = new_task_feature_names();
  for (const auto& s : samples) {
    for (Eigen::Index r = 0; r < s.hosts.rows(); ++r)
      for (int f = 0; f < kHostFeatures; ++f) see(hn[f], s.hosts(r, f));
    for (Eigen::Index r = 0; r < s.continuing_count; ++r)
      for (int f = 0; f < kTaskFeatures; ++f) see(cn[f], s.continuing(r, f));
    for (Eigen::Index r = s.continuing_count; r < s.continuing_count + s.new_count; ++r)
      for (int f = 0; f < kTaskFeatures; ++f) see(nn[f], s.new_tasks(r, f));
  }
  MinMaxTable t;
  // Features never observed (e.g. no task ever continued) get a degenerate range.
  for (const auto* names : {&hn, &cn, &nn}) {
    for (const auto& f : *names) {
      const auto it = acc.find(f);
      if (it == acc.end()) {
        t.set(f, 0.0, 0.0);
      } else {
        t.set(f, it->second.first, it->second.second);
      }
    }
  }
  t.set(kPrevHostFeature, 0.0, 1.0);
  return t;
}

}  // namespace edgesched
