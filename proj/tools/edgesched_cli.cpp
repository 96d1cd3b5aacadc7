// Command-line front end: run, compare, scale, fit-norms.
#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

#include "edgesched/harness/experiment.hpp"

using namespace edgesched;
using harness::ExperimentConfig;

namespace {

struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "key=value config file");
    for (const auto& key : harness::config_keys()) {
      cmd->add_option("--" + key, values[key], "override config key '" + key + "'");
    }
  }

  ExperimentConfig build() const {
    ExperimentConfig c = file.empty() ? ExperimentConfig{} : ExperimentConfig::load(file);
    for (const auto& [k, v] : values) {
      if (!v.empty()) c.set(k, v);
    }
    c.validate();
    return c;
  }
};

void print_report(const EvaluationReport& r) {
  for (const auto& [k, v] : r.as_map()) std::cout << k << " = " << v << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-cloud task scheduling simulator and learners"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "run one experiment and write its artifacts");
  run_flags.attach(run);

  std::vector<std::string> compare_dirs;
  std::string compare_csv;
  auto* compare = app.add_subcommand("compare", "tabulate aggregates of finished runs");
  compare->add_option("runs", compare_dirs, "run directories")->required();
  compare->add_option("--csv", compare_csv, "also write the table as CSV");

  ConfigFlags scale_flags;
  std::vector<int> agent_counts{1, 2, 4};
  double target = 0.0;
  int window = 5;
  std::string scale_out;
  auto* scale = app.add_subcommand("scale", "time-to-target-loss for several agent counts");
  scale_flags.attach(scale);
  scale->add_option("--agent-counts", agent_counts, "agent counts to measure")->delimiter(',');
  scale->add_option("--target", target, "mean episode loss to reach")->required();
  scale->add_option("--window", window, "updates averaged when testing the target");
  scale->add_option("--out", scale_out, "write the table as CSV");

  ConfigFlags norm_flags;
  std::string norm_out = "norms.txt";
  auto* norms = app.add_subcommand("fit-norms", "fit the normalization table on an LR-MMT sample run");
  norm_flags.attach(norms);
  norms->add_option("-o,--out", norm_out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = run_flags.build();
      const auto result = harness::run_experiment(config);
      std::cout << "wrote " << config.output_dir << " (" << result.records().size() << " intervals, "
                << result.updates << " updates)\n";
      print_report(result.report);
    } else if (*compare) {
      std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
      const auto rows = harness::compare_runs(dirs);
      std::cout << harness::format_comparison(rows);
      if (!compare_csv.empty()) harness::write_file_atomic(compare_csv, harness::comparison_csv(rows));
    } else if (*scale) {
      const auto config = scale_flags.build();
      const auto table = harness::resolve_norms(config);
      const auto rows = harness::measure_scaling(config, agent_counts, target, table, window);
      const std::string csv = harness::scaling_csv(rows);
      std::cout << csv;
      if (!scale_out.empty()) harness::write_file_atomic(scale_out, csv);
    } else if (*norms) {
      const auto config = norm_flags.build();
      harness::fit_norms(config).save(norm_out);
      std::cout << "wrote " << norm_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
