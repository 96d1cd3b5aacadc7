#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "edgesched/core/model.hpp"

namespace edgesched {

/// Fixed network-facing dimensions: task rows and host columns.
struct StateShape {
  int max_tasks = 16;
  int hosts = 8;

  int input_size() const;
  friend bool operator==(const StateShape&, const StateShape&) = default;
};

inline constexpr int kHostFeatures = 14;
inline constexpr int kTaskFeatures = 4;

const std::vector<std::string>& host_feature_names();
const std::vector<std::string>& new_task_feature_names();
const std::vector<std::string>& continuing_task_feature_names();
// One-hot previous-host columns share this feature name.
inline constexpr const char* kPrevHostFeature = "prev_host";

/// Model input for one interval.
///
/// Output row j of the policy belongs to `row_tasks[j]`: continuing tasks first
/// (ascending id), then new tasks (ascending id). Continuing tasks occupy rows
/// 0..c-1 of `continuing`; new tasks occupy rows c..c+k-1 of `new_tasks`, so
/// every task's input row index equals its output row index. Unused rows are 0.
struct StateMatrices {
  Eigen::MatrixXd hosts;       // n x kHostFeatures
  Eigen::MatrixXd new_tasks;   // max_tasks x kTaskFeatures
  Eigen::MatrixXd continuing;  // max_tasks x (kTaskFeatures + n)
  std::vector<TaskId> row_tasks;
  int continuing_count = 0;
  int new_count = 0;

  /// Row-major concatenation: hosts, continuing, new tasks.
  Eigen::VectorXd flatten() const;
};

/// Per-feature [min, max] used for standardization.
class MinMaxTable {
 public:
  void set(const std::string& feature, double min, double max);
  bool contains(const std::string& feature) const { return ranges_.contains(feature); }
  std::pair<double, double> range(const std::string& feature) const;
  const std::map<std::string, std::pair<double, double>>& entries() const { return ranges_; }

  void write(std::ostream& out) const;
  static MinMaxTable read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static MinMaxTable load(const std::filesystem::path& path);

  friend bool operator==(const MinMaxTable&, const MinMaxTable&) = default;

 private:
  std::map<std::string, std::pair<double, double>> ranges_;
};

/// 0 when max == min, otherwise (v - min) / (max - min) clipped to [0,1].
double standardize(double value, const std::string& feature, const MinMaxTable& table);

/// Unstandardized state. Continuing tasks must sit on valid hosts.
StateMatrices build_raw_state(const std::vector<Host>& hosts, const TaskMap& tasks,
                              const TaskSets& sets, const StateShape& shape);

/// Standardized state; padded rows stay zero.
StateMatrices build_state(const std::vector<Host>& hosts, const TaskMap& tasks,
                          const TaskSets& sets, const MinMaxTable& table,
                          const StateShape& shape);

StateMatrices standardize_state(const StateMatrices& raw, const MinMaxTable& table);

/// Column-wise min/max over the occupied rows of every sample. One-hot host
/// columns are pinned to [0,1]. Throws ValidationError on an empty sample.
MinMaxTable fit_minmax(std::span<const StateMatrices> samples);

}  // namespace edgesched
