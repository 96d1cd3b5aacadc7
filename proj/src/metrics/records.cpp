#include "edgesched/metrics/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/text.hpp"

namespace edgesched {

const std::vector<std::string>& interval_csv_columns() {
  static const std::vector<std::string> cols = {
      "interval", "active",   "arriving",   "leaving",  "deferred",          "migrations",
      "migration_time",       "energy_j",   "cost",     "aec",               "art",
      "amt",      "cost_norm", "slav",      "loss",     "penalty",           "loss_pg",
      "response_time_sum",    "completion_time_sum",    "sla_sum",
      "completed_within_expected",          "mean_utilization"};
  return cols;
}

void write_interval_csv(std::ostream& out, std::span<const IntervalRecord> records) {
  const auto& cols = interval_csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  auto d = [](double v) { return text::format_double(v); };
  for (const auto& r : records) {
    out << r.interval << ',' << r.active << ',' << r.arriving << ',' << r.leaving << ','
        << r.deferred << ',' << r.migrations << ',' << d(r.migration_time) << ','
        << d(r.energy_j) << ',' << d(r.cost) << ',' << d(r.metrics.aec) << ','
        << d(r.metrics.art) << ',' << d(r.metrics.amt) << ',' << d(r.metrics.cost) << ','
        << d(r.metrics.slav) << ',' << d(r.metrics.loss) << ',' << d(r.penalty) << ','
        << d(r.loss_pg) << ',' << d(r.response_time_sum) << ',' << d(r.completion_time_sum)
        << ',' << d(r.sla_sum) << ',' << r.completed_within_expected << ','
        << d(r.mean_utilization) << '\n';
  }
}

std::vector<IntervalRecord> read_interval_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<IntervalRecord> out;
  const auto& cols = interval_csv_columns();
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (line_no == 1) {
      if (cells != cols) throw ParseError("interval CSV header does not match schema v1");
      continue;
    }
    if (cells.size() != cols.size()) {
      throw ParseError("interval CSV row " + std::to_string(line_no) + " has wrong field count");
    }
    const std::string w = "interval CSV row " + std::to_string(line_no);
    auto i = [&](std::size_t c) { return static_cast<int>(text::parse_int(cells[c], w)); };
    auto d = [&](std::size_t c) { return text::parse_double(cells[c], w); };
    IntervalRecord r;
    r.interval = i(0);
    r.active = i(1);
    r.arriving = i(2);
    r.leaving = i(3);
    r.deferred = i(4);
    r.migrations = i(5);
    r.migration_time = d(6);
    r.energy_j = d(7);
    r.cost = d(8);
    r.metrics = {d(9), d(10), d(11), d(12), d(13), d(14)};
    r.penalty = d(15);
    r.loss_pg = d(16);
    r.response_time_sum = d(17);
    r.completion_time_sum = d(18);
    r.sla_sum = d(19);
    r.completed_within_expected = i(20);
    r.mean_utilization = d(21);
    out.push_back(r);
  }
  return out;
}

std::vector<IntervalRecord> read_interval_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_interval_csv(in);
}

std::map<std::string, double> EvaluationReport::as_map() const {
  return {{"intervals", intervals},
          {"total_energy_j", total_energy_j},
          {"average_response_time", average_response_time},
          {"sla_violation", sla_violation},
          {"total_cost", total_cost},
          {"average_completion_time", average_completion_time},
          {"completed_tasks", completed_tasks},
          {"completed_within_expected_fraction", completed_within_expected_fraction},
          {"migrations_per_interval", migrations_per_interval},
          {"migration_time_per_interval", migration_time_per_interval},
          {"mean_loss", mean_loss},
          {"mean_penalty", mean_penalty},
          {"mean_loss_pg", mean_loss_pg}};
}

EvaluationReport evaluation_aggregates(std::span<const IntervalRecord> records) {
  EvaluationReport rep;
  rep.intervals = static_cast<int>(records.size());
  if (records.empty()) return rep;
  double response = 0.0, completion = 0.0, sla = 0.0, migrations = 0.0, mig_time = 0.0;
  double loss = 0.0, pen = 0.0, loss_pg = 0.0;
  int leaving = 0, within = 0;
  for (const auto& r : records) {
    rep.total_energy_j += r.energy_j;
    rep.total_cost += r.cost;
    response += r.response_time_sum;
    completion += r.completion_time_sum;
    sla += r.sla_sum;
    leaving += r.leaving;
    within += r.completed_within_expected;
    migrations += r.migrations;
    mig_time += r.migration_time;
    loss += r.metrics.loss;
    pen += r.penalty;
    loss_pg += r.loss_pg;
  }
  const double n = static_cast<double>(records.size());
  rep.completed_tasks = leaving;
  if (leaving > 0) {
    rep.average_response_time = response / leaving;
    rep.average_completion_time = completion / leaving;
    rep.sla_violation = sla / leaving;
    rep.completed_within_expected_fraction = static_cast<double>(within) / leaving;
  }
  rep.migrations_per_interval = migrations / n;
  rep.migration_time_per_interval = mig_time / n;
  rep.mean_loss = loss / n;
  rep.mean_penalty = pen / n;
  rep.mean_loss_pg = loss_pg / n;
  return rep;
}

void write_key_values(std::ostream& out, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[text::trim(t.substr(0, eq))] = text::trim(t.substr(eq + 1));
  }
  return kv;
}

void write_report(std::ostream& out, const EvaluationReport& report) {
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : report.as_map()) kv[k] = text::format_double(v);
  kv["csv_schema"] = std::to_string(kIntervalCsvVersion);
  write_key_values(out, kv);
}

EvaluationReport read_report(std::istream& in) {
  const auto kv = read_key_values(in);
  auto get = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw ParseError("report is missing '" + k + "'");
    return text::parse_double(it->second, k);
  };
  EvaluationReport r;
  r.intervals = static_cast<int>(get("intervals"));
  r.total_energy_j = get("total_energy_j");
  r.average_response_time = get("average_response_time");
  r.sla_violation = get("sla_violation");
  r.total_cost = get("total_cost");
  r.average_completion_time = get("average_completion_time");
  r.completed_tasks = static_cast<int>(get("completed_tasks"));
  r.completed_within_expected_fraction = get("completed_within_expected_fraction");
  r.migrations_per_interval = get("migrations_per_interval");
  r.migration_time_per_interval = get("migration_time_per_interval");
  r.mean_loss = get("mean_loss");
  r.mean_penalty = get("mean_penalty");
  r.mean_loss_pg = get("mean_loss_pg");
  return r;
}

}  // namespace edgesched
