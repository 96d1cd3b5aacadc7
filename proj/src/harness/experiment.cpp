#include "edgesched/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/host_table.hpp"
#include "edgesched/core/text.hpp"
#include "edgesched/sched/heuristics.hpp"
#include "edgesched/workload/trace.hpp"

namespace edgesched::harness {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

ClusterConfig make_cluster(const ExperimentConfig& config) {
  ClusterConfig c;
  if (config.cluster == "desk") {
    c.hosts = desk_cluster();
  } else if (config.cluster == "full") {
    c.hosts = full_cluster();
  } else {
    c.hosts = instantiate_hosts(load_host_table(config.cluster));
  }
  c.max_tasks = config.max_tasks;
  c.interval_seconds = config.interval_seconds;
  c.hyperparams = config.hyperparams;
  c.episode_size = config.episode_size;
  c.validate();
  return c;
}

WorkloadGenerator make_workload(const ExperimentConfig& config, std::uint64_t seed) {
  ArrivalModel arrivals{config.mean_new, config.std_new, config.mean_duration, config.std_duration, seed};
  if (config.workload == "synthetic") {
    return WorkloadGenerator(arrivals, SyntheticDemandModel{}, config.interval_seconds);
  }
  const TraceSet traces = load_trace_dir(config.trace_dir);
  std::vector<std::shared_ptr<const DemandProfile>> profiles;
  for (const auto& [id, stream] : traces) {
    if (config.trace_split == "train" && !is_training_trace(id, config.train_fraction)) continue;
    if (config.trace_split == "test" && is_training_trace(id, config.train_fraction)) continue;
    if (!stream.empty()) profiles.push_back(profile_from_trace(stream));
  }
  if (profiles.empty()) throw ConfigError("no usable traces in " + config.trace_dir);
  return WorkloadGenerator(arrivals, std::move(profiles), config.interval_seconds);
}

MinMaxTable fit_norms(const ExperimentConfig& config) {
  Environment env(make_cluster(config), make_workload(config, config.seed));
  env.collect_raw_states(true);
  sched::LrMmtScheduler lr;
  for (int i = 0; i < config.norm_sample_intervals; ++i) env.step(lr);
  return fit_minmax(env.raw_states());
}

MinMaxTable resolve_norms(const ExperimentConfig& config) {
  if (!config.norms.empty()) return MinMaxTable::load(config.norms);
  return fit_norms(config);
}

namespace {

// Drives one replica; `after_update` runs whenever the scheduler reports an update.
template <class AfterUpdate>
void drive(Environment& env, sched::Scheduler& s, int intervals, int episode_size,
           std::vector<IntervalRecord>& out, const std::atomic<bool>& stop, AfterUpdate&& after_update) {
  for (int i = 0; i < intervals && !stop.load(); ++i) {
    out.push_back(env.step(s));
    if ((i + 1) % episode_size == 0 && s.end_episode()) after_update();
  }
  if (s.end_episode()) after_update();
}

sched::PolicyGradientOptions pg_options(const ExperimentConfig& c) {
  sched::PolicyGradientOptions o;
  o.hidden = c.hidden;
  o.learning_rate = c.learning_rate;
  o.min_learning_rate = c.min_learning_rate;
  o.grad_clip = c.grad_clip;
  o.seed = c.seed;
  return o;
}

sched::DqnOptions dqn_options(const ExperimentConfig& c) {
  sched::DqnOptions o;
  o.hidden = c.hidden;
  o.learning_rate = c.dqn_learning_rate;
  o.discount = c.dqn_discount;
  o.total_steps = c.intervals;
  o.seed = c.seed;
  return o;
}

std::unique_ptr<sched::Scheduler> make_single(const ExperimentConfig& c, const StateShape& shape) {
  if (c.scheduler == "random") return std::make_unique<sched::RandomScheduler>(c.seed);
  if (c.scheduler == "lr-mmt") return std::make_unique<sched::LrMmtScheduler>();
  if (c.scheduler == "mad-mc") return std::make_unique<sched::MadMcScheduler>();
  if (c.scheduler == "reinforce") {
    if (!c.init_checkpoint.empty()) {
      return std::make_unique<sched::ReinforceScheduler>(nn::load_mlp(fs::path(c.init_checkpoint)), shape,
                                                         pg_options(c));
    }
    return std::make_unique<sched::ReinforceScheduler>(shape, pg_options(c));
  }
  if (c.scheduler == "dqn") {
    if (!c.init_checkpoint.empty()) {
      return std::make_unique<sched::DqnScheduler>(nn::load_mlp(fs::path(c.init_checkpoint)), shape,
                                                   dqn_options(c));
    }
    return std::make_unique<sched::DqnScheduler>(shape, dqn_options(c));
  }
  throw ConfigError("unknown scheduler '" + c.scheduler + "'");
}

double recent_mean_loss(const std::vector<sched::TrainingLogEntry>& log, int window) {
  const auto k = std::min<std::size_t>(log.size(), static_cast<std::size_t>(window));
  double s = 0.0;
  for (std::size_t i = log.size() - k; i < log.size(); ++i) s += log[i].mean_loss;
  return s / static_cast<double>(k);
}

RunResult execute_a3c(const ExperimentConfig& config, const MinMaxTable& table, const ExecuteOptions& opts) {
  const ClusterConfig cluster = make_cluster(config);
  const StateShape shape{cluster.max_tasks, static_cast<int>(cluster.hosts.size())};
  nn::R2N2Params init = config.init_checkpoint.empty() ? nn::R2N2Params::init(shape, config.hidden, config.seed)
                                                       : nn::load_r2n2(fs::path(config.init_checkpoint));
  if (!(init.shape == shape)) throw ConfigError("checkpoint does not match the cluster shape");
  auto store = std::make_shared<sched::GlobalParamStore>(
      std::move(init), sched::AdaptiveLearningRate(config.learning_rate, 10, 0.1, config.min_learning_rate), config.grad_clip);

  const int n = config.agents;
  RunResult result;
  result.agent_records.resize(static_cast<std::size_t>(n));
  result.agent_timings.resize(static_cast<std::size_t>(n));

  std::vector<std::unique_ptr<Environment>> envs;
  std::vector<std::unique_ptr<sched::A3cAgent>> agents;
  for (int k = 0; k < n; ++k) {
    envs.push_back(std::make_unique<Environment>(cluster, make_workload(config, config.seed + static_cast<std::uint64_t>(k)), table));
    agents.push_back(std::make_unique<sched::A3cAgent>(store, k));
    agents.back()->set_learning(config.learning);
  }

  std::atomic<bool> stop{false};
  std::mutex target_mutex;
  const auto t0 = Clock::now();
  auto after_update = [&] {
    if (!opts.target_loss) return;
    const auto log = store->log();
    if (static_cast<int>(log.size()) < opts.target_window) return;
    if (recent_mean_loss(log, opts.target_window) <= *opts.target_loss) {
      std::lock_guard lock(target_mutex);
      if (!result.seconds_to_target) {
        result.seconds_to_target = std::chrono::duration<double>(Clock::now() - t0).count();
      }
      stop = true;
    }
  };

  auto run_agent = [&](int k) {
    const auto ks = static_cast<std::size_t>(k);
    drive(*envs[ks], *agents[ks], config.intervals, config.episode_size, result.agent_records[ks], stop,
          after_update);
  };

  if (n == 1) {
    run_agent(0);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> threads;
    for (int k = 0; k < n; ++k) {
      threads.emplace_back([&, k] {
        try {
          run_agent(k);
        } catch (...) {
          errors[static_cast<std::size_t>(k)] = std::current_exception();
          stop = true;
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  for (int k = 0; k < n; ++k) result.agent_timings[static_cast<std::size_t>(k)] = envs[static_cast<std::size_t>(k)]->timings();
  result.training_log = store->log();
  result.updates = static_cast<int>(result.training_log.size());
  result.r2n2 = store->snapshot();
  return result;
}

}  // namespace

RunResult execute(const ExperimentConfig& config, const MinMaxTable& table, const ExecuteOptions& opts) {
  config.validate();
  RunResult result;
  if (config.scheduler == "a3c") {
    result = execute_a3c(config, table, opts);
  } else {
    const ClusterConfig cluster = make_cluster(config);
    Environment env(cluster, make_workload(config, config.seed), table);
    auto s = make_single(config, env.shape());
    s->set_learning(config.learning);
    result.agent_records.resize(1);
    std::atomic<bool> stop{false};
    const auto t0 = Clock::now();
    drive(env, *s, config.intervals, config.episode_size, result.agent_records[0], stop,
          [&] { ++result.updates; });
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.agent_timings.push_back(env.timings());
    if (auto* r = dynamic_cast<sched::ReinforceScheduler*>(s.get())) {
      result.training_log = r->log();
      result.mlp = r->params();
    } else if (auto* d = dynamic_cast<sched::DqnScheduler*>(s.get())) {
      result.mlp = d->params();
    }
  }
  result.report = evaluation_aggregates(result.records());
  return result;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string csv_text(const std::vector<IntervalRecord>& records) {
  std::ostringstream out;
  write_interval_csv(out, records);
  return out.str();
}

std::string timing_text(const std::vector<IntervalTiming>& t) {
  std::ostringstream out;
  out << "interval,decide_seconds,step_seconds,overhead\n";
  for (const auto& x : t) {
    out << x.interval << ',' << text::format_double(x.decide_seconds) << ','
        << text::format_double(x.step_seconds) << ','
        << text::format_double(x.step_seconds > 0 ? x.decide_seconds / x.step_seconds : 0.0) << '\n';
  }
  return out.str();
}

std::string log_text(const std::vector<sched::TrainingLogEntry>& log) {
  std::ostringstream out;
  out << "update,learning_rate,mean_loss,mean_penalty,agent\n";
  for (const auto& e : log) {
    out << e.update << ',' << text::format_double(e.learning_rate) << ',' << text::format_double(e.mean_loss)
        << ',' << text::format_double(e.mean_penalty) << ',' << e.agent << '\n';
  }
  return out.str();
}

}  // namespace

void write_artifacts(const fs::path& dir, const ExperimentConfig& config, const MinMaxTable& table,
                     const RunResult& result) {
  fs::create_directories(dir);
  {
    std::ostringstream out;
    write_key_values(out, config.to_map());
    write_file_atomic(dir / "config.txt", out.str());
  }
  {
    std::ostringstream out;
    table.write(out);
    write_file_atomic(dir / "norms.txt", out.str());
  }
  write_file_atomic(dir / "intervals.csv", csv_text(result.records()));
  for (std::size_t k = 1; k < result.agent_records.size(); ++k) {
    write_file_atomic(dir / ("intervals_agent" + std::to_string(k) + ".csv"), csv_text(result.agent_records[k]));
  }
  {
    std::ostringstream out;
    write_report(out, result.report);
    write_file_atomic(dir / "report.txt", out.str());
  }
  write_file_atomic(dir / "timing.csv", timing_text(result.agent_timings.front()));
  if (result.r2n2 || result.mlp) {
    write_file_atomic(dir / "training_log.csv", log_text(result.training_log));
    std::ostringstream out;
    if (result.r2n2) nn::save_params(out, *result.r2n2);
    else nn::save_params(out, *result.mlp);
    write_file_atomic(dir / "checkpoint.txt", out.str());
  }
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const MinMaxTable table = resolve_norms(config);
  RunResult result = execute(config, table);
  write_artifacts(config.output_dir, config, table, result);
  return result;
}

std::vector<ComparisonRow> compare_runs(const std::vector<fs::path>& run_dirs) {
  std::vector<ComparisonRow> rows;
  for (const auto& dir : run_dirs) {
    const auto records = read_interval_csv(dir / "intervals.csv");
    std::string name = dir.filename().string();
    if (name.empty()) name = dir.parent_path().filename().string();
    if (fs::exists(dir / "config.txt")) {
      std::ifstream in(dir / "config.txt");
      const auto kv = read_key_values(in);
      if (const auto it = kv.find("scheduler"); it != kv.end()) name += " (" + it->second + ")";
    }
    rows.push_back({name, evaluation_aggregates(records)});
  }
  return rows;
}

namespace {

struct Column {
  const char* title;
  double (*get)(const EvaluationReport&);
};

const std::vector<Column>& comparison_columns() {
  static const std::vector<Column> cols = {
      {"total_energy_j", [](const EvaluationReport& r) { return r.total_energy_j; }},
      {"average_response_time", [](const EvaluationReport& r) { return r.average_response_time; }},
      {"sla_violation", [](const EvaluationReport& r) { return r.sla_violation; }},
      {"total_cost", [](const EvaluationReport& r) { return r.total_cost; }},
      {"average_completion_time", [](const EvaluationReport& r) { return r.average_completion_time; }},
      {"completed_tasks", [](const EvaluationReport& r) { return static_cast<double>(r.completed_tasks); }},
      {"completed_within_expected_fraction",
       [](const EvaluationReport& r) { return r.completed_within_expected_fraction; }},
      {"migrations_per_interval", [](const EvaluationReport& r) { return r.migrations_per_interval; }},
      {"mean_loss_pg", [](const EvaluationReport& r) { return r.mean_loss_pg; }}};
  return cols;
}

double relative(double v, double base) { return base != 0.0 ? (v - base) / std::abs(base) : 0.0; }

}  // namespace

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "run";
  for (const auto& c : comparison_columns()) out << ',' << c.title;
  for (const auto& c : comparison_columns()) out << ",rel_" << c.title;
  out << '\n';
  for (const auto& r : rows) {
    out << r.name;
    for (const auto& c : comparison_columns()) out << ',' << text::format_double(c.get(r.report));
    for (const auto& c : comparison_columns()) {
      out << ',' << text::format_double(relative(c.get(r.report), c.get(rows.front().report)));
    }
    out << '\n';
  }
  return out.str();
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  std::size_t name_w = 3;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
  out << std::left << std::setw(static_cast<int>(name_w)) << "run";
  for (const auto& c : comparison_columns()) out << "  " << std::right << std::setw(14) << std::string(c.title).substr(0, 14);
  out << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(name_w)) << r.name;
    for (const auto& c : comparison_columns()) {
      out << "  " << std::right << std::setw(14) << std::setprecision(6) << c.get(r.report);
    }
    out << '\n';
  }
  if (rows.size() > 1) {
    out << "relative to " << rows.front().name << ":\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      out << std::left << std::setw(static_cast<int>(name_w)) << rows[i].name;
      for (const auto& c : comparison_columns()) {
        out << "  " << std::right << std::setw(13) << std::fixed << std::setprecision(2)
            << 100.0 * relative(c.get(rows[i].report), c.get(rows.front().report)) << '%';
        out.unsetf(std::ios::fixed);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::vector<ScalingRow> measure_scaling(const ExperimentConfig& config, const std::vector<int>& agent_counts,
                                        double target_loss, const MinMaxTable& table, int window) {
  if (agent_counts.empty()) throw ConfigError("no agent counts given");
  if (window < 1) throw ConfigError("scaling window must be at least 1");
  std::vector<ScalingRow> rows;
  for (int n : agent_counts) {
    ExperimentConfig c = config;
    c.scheduler = "a3c";
    c.agents = n;
    c.learning = true;
    const RunResult r = execute(c, table, ExecuteOptions{target_loss, window});
    ScalingRow row;
    row.agents = n;
    row.reached = r.seconds_to_target.has_value();
    row.seconds = r.seconds_to_target.value_or(r.wall_seconds);
    row.updates = r.updates;
    rows.push_back(row);
  }
  const ScalingRow& base = rows.front();
  for (auto& row : rows) {
    if (base.reached && row.reached && row.seconds > 0.0) {
      row.speedup = base.seconds / row.seconds;
      row.efficiency = row.speedup * base.agents / row.agents;
    }
  }
  return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::ostringstream out;
  out << "agents,reached,seconds,speedup,efficiency,updates\n";
  for (const auto& r : rows) {
    out << r.agents << ',' << (r.reached ? "true" : "false") << ',' << text::format_double(r.seconds) << ','
        << (r.reached ? text::format_double(r.speedup) : "unreached") << ','
        << (r.reached ? text::format_double(r.efficiency) : "unreached") << ',' << r.updates << '\n';
  }
  return out.str();
}

}  // namespace edgesched::harness
