#include "edgesched/harness/config.hpp"

#include <algorithm>
#include <fstream>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/text.hpp"
#include "edgesched/metrics/records.hpp"

namespace edgesched::harness {

const std::vector<std::string>& scheduler_names() {
  static const std::vector<std::string> names = {"a3c", "reinforce", "dqn", "random", "lr-mmt", "mad-mc"};
  return names;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "scheduler", "cluster", "workload", "trace_dir", "trace_split", "train_fraction",
      "seed", "intervals", "episode_size", "interval_seconds", "max_tasks",
      "alpha", "beta", "gamma", "delta", "epsilon", "agents", "output_dir",
      "mean_new", "std_new", "mean_duration", "std_duration",
      "hidden", "learning_rate", "min_learning_rate", "grad_clip", "learning", "init_checkpoint", "norms",
      "norm_sample_intervals", "dqn_learning_rate", "dqn_discount"};
  return keys;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
  try {
    return static_cast<int>(text::parse_int(v, key));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return text::parse_double(v, key);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = text::trim(raw);
  if (key == "scheduler") scheduler = v;
  else if (key == "cluster") cluster = v;
  else if (key == "workload") workload = v;
  else if (key == "trace_dir") trace_dir = v;
  else if (key == "trace_split") trace_split = v;
  else if (key == "train_fraction") train_fraction = to_double(key, v);
  else if (key == "seed") {
    const int s = to_int(key, v);
    if (s < 0) throw ConfigError("seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  }
  else if (key == "intervals") intervals = to_int(key, v);
  else if (key == "episode_size") episode_size = to_int(key, v);
  else if (key == "interval_seconds") interval_seconds = to_double(key, v);
  else if (key == "max_tasks") max_tasks = to_int(key, v);
  else if (key == "alpha") hyperparams.alpha = to_double(key, v);
  else if (key == "beta") hyperparams.beta = to_double(key, v);
  else if (key == "gamma") hyperparams.gamma = to_double(key, v);
  else if (key == "delta") hyperparams.delta = to_double(key, v);
  else if (key == "epsilon") hyperparams.epsilon = to_double(key, v);
  else if (key == "agents") agents = to_int(key, v);
  else if (key == "output_dir") output_dir = v;
  else if (key == "mean_new") mean_new = to_double(key, v);
  else if (key == "std_new") std_new = to_double(key, v);
  else if (key == "mean_duration") mean_duration = to_double(key, v);
  else if (key == "std_duration") std_duration = to_double(key, v);
  else if (key == "hidden") hidden = to_int(key, v);
  else if (key == "learning_rate") learning_rate = to_double(key, v);
  else if (key == "min_learning_rate") min_learning_rate = to_double(key, v);
  else if (key == "grad_clip") grad_clip = to_double(key, v);
  else if (key == "learning") learning = to_bool(key, v);
  else if (key == "init_checkpoint") init_checkpoint = v;
  else if (key == "norms") norms = v;
  else if (key == "norm_sample_intervals") norm_sample_intervals = to_int(key, v);
  else if (key == "dqn_learning_rate") dqn_learning_rate = to_double(key, v);
  else if (key == "dqn_discount") dqn_discount = to_double(key, v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  auto d = [](double x) { return text::format_double(x); };
  return {
      {"scheduler", scheduler}, {"cluster", cluster}, {"workload", workload},
      {"trace_dir", trace_dir}, {"trace_split", trace_split}, {"train_fraction", d(train_fraction)},
      {"seed", std::to_string(seed)}, {"intervals", std::to_string(intervals)},
      {"episode_size", std::to_string(episode_size)}, {"interval_seconds", d(interval_seconds)},
      {"max_tasks", std::to_string(max_tasks)}, {"alpha", d(hyperparams.alpha)},
      {"beta", d(hyperparams.beta)}, {"gamma", d(hyperparams.gamma)}, {"delta", d(hyperparams.delta)},
      {"epsilon", d(hyperparams.epsilon)}, {"agents", std::to_string(agents)},
      {"output_dir", output_dir}, {"mean_new", d(mean_new)}, {"std_new", d(std_new)},
      {"mean_duration", d(mean_duration)}, {"std_duration", d(std_duration)},
      {"hidden", std::to_string(hidden)}, {"learning_rate", d(learning_rate)},
      {"min_learning_rate", d(min_learning_rate)},
      {"grad_clip", d(grad_clip)}, {"learning", learning ? "true" : "false"},
      {"init_checkpoint", init_checkpoint}, {"norms", norms},
      {"norm_sample_intervals", std::to_string(norm_sample_intervals)},
      {"dqn_learning_rate", d(dqn_learning_rate)}, {"dqn_discount", d(dqn_discount)}};
}

void ExperimentConfig::validate() const {
  const auto& names = scheduler_names();
  if (std::find(names.begin(), names.end(), scheduler) == names.end()) {
    throw ConfigError("unknown scheduler '" + scheduler + "'");
  }
  if (intervals < 1) throw ConfigError("intervals must be at least 1");
  if (episode_size < 1) throw ConfigError("episode_size must be at least 1");
  if (!(interval_seconds > 0.0)) throw ConfigError("interval_seconds must be positive");
  if (max_tasks < 1) throw ConfigError("max_tasks must be at least 1");
  if (agents < 1) throw ConfigError("agents must be at least 1");
  if (hidden < 1) throw ConfigError("hidden must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (min_learning_rate < 0.0) {
    throw ConfigError("min_learning_rate must be non-negative");
  }
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be non-negative");
  if (norm_sample_intervals < 1) throw ConfigError("norm_sample_intervals must be at least 1");
  if (workload != "synthetic" && workload != "trace") throw ConfigError("workload must be synthetic or trace");
  if (workload == "trace" && trace_dir.empty()) throw ConfigError("trace workload needs trace_dir");
  if (trace_split != "all" && trace_split != "train" && trace_split != "test") {
    throw ConfigError("trace_split must be all, train or test");
  }
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw ConfigError("train_fraction must lie in [0,1]");
  if (!(dqn_discount >= 0.0 && dqn_discount <= 1.0)) throw ConfigError("dqn_discount must lie in [0,1]");
  try {
    hyperparams.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  for (const auto& [k, v] : kv) c.set(k, v);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return from_map(read_key_values(in));
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_key_values(out, to_map());
}

}  // namespace edgesched::harness
