#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <random>

#include "edgesched/core/errors.hpp"
#include "edgesched/nn/nn.hpp"
#include "edgesched/sched/scheduler.hpp"

namespace edgesched::sched {

/// Learning rate that drops tenfold once the reward has plateaued: the summed
/// magnitude of the last `window` reward changes falls below `threshold`.
class AdaptiveLearningRate {
 public:
  explicit AdaptiveLearningRate(double initial = 1e-2, std::size_t window = 10, double threshold = 0.1,
                                double floor = 0.0)
      : lr_(initial), window_(window), threshold_(threshold), floor_(std::min(floor, initial)) {}

  double value() const { return lr_; }
  /// Records one update's reward; returns true when the rate was reduced.
  bool record(double reward);

 private:
  double lr_;
  std::size_t window_;
  double threshold_;
  double floor_;
  std::optional<double> last_reward_;
  std::deque<double> deltas_;
};

struct TrainingLogEntry {
  int update = 0;
  double learning_rate = 0.0;  // rate used for this update
  double mean_loss = 0.0;      // mean Loss^PG of the episode behind the update
  double mean_penalty = 0.0;
  int agent = 0;
};

/// Global parameters shared by asynchronous agents. Reads and updates are
/// serialized; an update returns the fresh parameters to the submitter.
template <class P>
class ParamStore {
 public:
  ParamStore(P initial, AdaptiveLearningRate lr, double grad_clip = 0.0)
      : theta_(std::move(initial)), lr_(lr), grad_clip_(grad_clip) {}

  P snapshot() const {
    std::lock_guard lock(mutex_);
    return theta_;
  }

  /// theta <- theta - lr * g, then logs the update and adapts the rate.
  P apply(const P& grads, double mean_loss, double mean_penalty, int agent = 0) {
    std::lock_guard lock(mutex_);
    double scale = lr_.value();
    if (grad_clip_ > 0.0) {
      const double norm = std::sqrt(nn::squared_norm(grads));
      if (norm > grad_clip_) scale *= grad_clip_ / norm;
    }
    nn::axpy(theta_, -scale, grads);
    if (!nn::all_finite(theta_)) throw NumericalFailure("parameters became non-finite after an update");
    log_.push_back({static_cast<int>(log_.size()) + 1, lr_.value(), mean_loss, mean_penalty, agent});
    lr_.record(-mean_loss);
    return theta_;
  }

  double learning_rate() const {
    std::lock_guard lock(mutex_);
    return lr_.value();
  }
  int update_count() const {
    std::lock_guard lock(mutex_);
    return static_cast<int>(log_.size());
  }
  std::vector<TrainingLogEntry> log() const {
    std::lock_guard lock(mutex_);
    return log_;
  }

 private:
  mutable std::mutex mutex_;
  P theta_;
  AdaptiveLearningRate lr_;
  double grad_clip_;
  std::vector<TrainingLogEntry> log_;
};

using GlobalParamStore = ParamStore<nn::R2N2Params>;

/// Committed host per output row, for rows whose task got a host.
using RowChoices = std::vector<std::pair<int, HostId>>;

RowChoices committed_rows(const std::vector<TaskId>& rows, const csm::ConstrainedAction& action);

/// Adds weight * d/dlogits sum_rows log softmax(row)[host] into `dlogits`.
void add_log_prob_grad(const Eigen::MatrixXd& policy, const RowChoices& choices, double weight,
                       Eigen::MatrixXd& dlogits);
double sum_log_prob(const Eigen::MatrixXd& policy, const RowChoices& choices);

class RandomScheduler final : public Scheduler {
 public:
  explicit RandomScheduler(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  Decision decide(const DecisionContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

// ---- A3C ----

struct A3cStep {
  nn::ForwardRecord record;
  RowChoices choices;
  double loss_pg = 0.0;
  double penalty = 0.0;
};
using EpisodeBuffer = std::vector<A3cStep>;

/// Per-step quantities treated as constants when differentiating: the actor
/// weight L_j + V_{j+1} and the bootstrap value V_{j+1} (0 at the end).
/// The actor weight carries no V_j baseline. Under deterministic ranking, pushing
/// down the committed host in proportion to its loss is what moves the argmax.
struct A3cTargets {
  std::vector<double> advantage;
  std::vector<double> next_value;
};
A3cTargets a3c_targets(const EpisodeBuffer& buffer);

/// sum_j (L_j + V_{j+1}) * sum_rows log pi(a_j | s_j) + (L_j + V_{j+1} - V_j)^2,
/// re-running the network from the stored inputs with `params`. Minimizing it
/// lowers the probability of committed choices in proportion to their loss.
double a3c_objective(const nn::R2N2Params& params, const EpisodeBuffer& buffer, const A3cTargets& targets);

struct A3cGradient {
  nn::R2N2Params grads;
  double objective = 0.0;
};
/// Gradient of a3c_objective at the parameters that produced the buffer.
A3cGradient a3c_accumulate(const nn::R2N2Params& params, const EpisodeBuffer& buffer);

/// One asynchronous actor-critic agent. It acts with a private copy of the
/// global parameters and pushes a gradient at each episode end.
class A3cAgent final : public Scheduler {
 public:
  A3cAgent(std::shared_ptr<GlobalParamStore> store, int agent_index = 0);

  std::string name() const override { return "a3c"; }
  bool needs_state() const override { return true; }
  Decision decide(const DecisionContext& ctx) override;
  void on_commit(const DecisionContext& ctx, const csm::ConstrainedAction& action) override;
  void observe(double loss_pg, double penalty) override;
  bool end_episode() override;
  void set_learning(bool on) override { learning_ = on; }
  bool is_learner() const override { return true; }
  void save_checkpoint(const std::filesystem::path& path) const override;

  const nn::R2N2Params& local_params() const { return local_; }
  const EpisodeBuffer& buffer() const { return buffer_; }

 private:
  std::shared_ptr<GlobalParamStore> store_;
  int agent_;
  nn::R2N2Params local_;
  nn::Hidden hidden_;
  EpisodeBuffer buffer_;
  std::vector<TaskId> pending_rows_;
  bool learning_ = true;
};

// ---- REINFORCE ----

struct PgStep {
  nn::MlpRecord record;
  Eigen::MatrixXd policy;
  RowChoices choices;
  double loss_pg = 0.0;
  double penalty = 0.0;
};

/// Gradient of sum_j (G_j - b_j) * sum_rows log pi(a_j | s_j), where G_j is the
/// loss-to-go from step j and b_j the supplied baseline.
nn::MlpParams reinforce_gradient(const nn::MlpParams& params, const std::vector<PgStep>& steps,
                                 const std::vector<double>& baseline, int rows, int hosts);

/// Undiscounted loss-to-go of an episode.
std::vector<double> returns_to_go(const std::vector<PgStep>& steps);

struct PolicyGradientOptions {
  int hidden = 64;
  double learning_rate = 1e-2;
  double min_learning_rate = 0.0;
  double grad_clip = 0.0;
  bool running_baseline = false;
  double baseline_decay = 0.9;
  std::uint64_t seed = 1;
};

/// Dense-only Monte Carlo policy gradient with a synchronous update per episode.
class ReinforceScheduler final : public Scheduler {
 public:
  ReinforceScheduler(const StateShape& shape, PolicyGradientOptions opts);
  ReinforceScheduler(nn::MlpParams params, const StateShape& shape, PolicyGradientOptions opts);

  std::string name() const override { return "reinforce"; }
  bool needs_state() const override { return true; }
  Decision decide(const DecisionContext& ctx) override;
  void on_commit(const DecisionContext& ctx, const csm::ConstrainedAction& action) override;
  void observe(double loss_pg, double penalty) override;
  bool end_episode() override;
  void set_learning(bool on) override { learning_ = on; }
  bool is_learner() const override { return true; }
  void save_checkpoint(const std::filesystem::path& path) const override;

  const nn::MlpParams& params() const { return params_; }
  const std::vector<TrainingLogEntry>& log() const { return log_; }
  double learning_rate() const { return lr_.value(); }

 private:
  StateShape shape_;
  PolicyGradientOptions opts_;
  nn::MlpParams params_;
  AdaptiveLearningRate lr_;
  std::vector<PgStep> steps_;
  std::vector<TaskId> pending_rows_;
  std::vector<double> baseline_;
  bool baseline_ready_ = false;
  std::vector<TrainingLogEntry> log_;
  bool learning_ = true;
};

// ---- Double DQN ----

struct DqnOptions {
  int hidden = 64;
  double learning_rate = 1e-3;
  double discount = 0.9;
  std::size_t replay_capacity = 5000;
  std::size_t batch_size = 32;
  int target_sync = 200;      // training steps between target copies
  int total_steps = 2000;     // decisions over which exploration decays
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double grad_clip = 10.0;
  std::uint64_t seed = 1;
};

struct Transition {
  Eigen::VectorXd state;
  RowChoices choices;
  double reward = 0.0;
  std::optional<Eigen::VectorXd> next_state;
  int next_rows = 0;
};

class DqnScheduler final : public Scheduler {
 public:
  DqnScheduler(const StateShape& shape, DqnOptions opts);
  DqnScheduler(nn::MlpParams params, const StateShape& shape, DqnOptions opts);

  std::string name() const override { return "dqn"; }
  bool needs_state() const override { return true; }
  Decision decide(const DecisionContext& ctx) override;
  void on_commit(const DecisionContext& ctx, const csm::ConstrainedAction& action) override;
  void observe(double loss_pg, double penalty) override;
  bool end_episode() override;
  void set_learning(bool on) override { learning_ = on; }
  bool is_learner() const override { return true; }
  void save_checkpoint(const std::filesystem::path& path) const override;

  double epsilon() const;
  /// max_tasks x hosts action values of the online network.
  Eigen::MatrixXd q_values(const Eigen::VectorXd& state) const;
  const nn::MlpParams& params() const { return online_; }
  int train_steps() const { return train_steps_; }

 private:
  void train_batch();

  StateShape shape_;
  DqnOptions opts_;
  nn::MlpParams online_;
  nn::MlpParams target_;
  std::mt19937_64 rng_;
  std::vector<Transition> replay_;
  std::size_t replay_next_ = 0;
  std::optional<Transition> pending_;
  std::vector<TaskId> pending_rows_;
  int decisions_ = 0;
  int train_steps_ = 0;
  int episode_updates_ = 0;
  bool learning_ = true;
};

}  // namespace edgesched::sched
