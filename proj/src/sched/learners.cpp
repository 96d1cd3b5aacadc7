#include "edgesched/sched/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgesched/core/errors.hpp"

namespace edgesched::sched {

bool AdaptiveLearningRate::record(double reward) {
  if (last_reward_) {
    deltas_.push_back(reward - *last_reward_);
    while (deltas_.size() > window_) deltas_.pop_front();
  }
  last_reward_ = reward;
  if (deltas_.size() < window_) return false;
  double total = 0.0;
  for (double d : deltas_) total += std::abs(d);
  if (total >= threshold_ || lr_ <= floor_) return false;
  lr_ = std::max(lr_ / 10.0, floor_);
  deltas_.clear();
  return true;
}

RowChoices committed_rows(const std::vector<TaskId>& rows, const csm::ConstrainedAction& action) {
  RowChoices out;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const csm::Placement* p = action.find(rows[j]);
    if (p && p->host) out.emplace_back(static_cast<int>(j), *p->host);
  }
  return out;
}

void add_log_prob_grad(const Eigen::MatrixXd& policy, const RowChoices& choices, double weight,
                       Eigen::MatrixXd& dlogits) {
  for (const auto& [row, host] : choices) {
    dlogits.row(row) -= weight * policy.row(row);
    dlogits(row, host) += weight;
  }
}

double sum_log_prob(const Eigen::MatrixXd& policy, const RowChoices& choices) {
  double s = 0.0;
  for (const auto& [row, host] : choices) s += std::log(std::max(policy(row, host), 1e-300));
  return s;
}

Decision RandomScheduler::decide(const DecisionContext& ctx) {
  csm::RankedAction a;
  const std::size_t n = ctx.hosts->size();
  for (TaskId id : row_tasks(ctx)) {
    csm::RankedRow row{id, std::vector<HostId>(n)};
    std::iota(row.hosts.begin(), row.hosts.end(), 0);
    std::shuffle(row.hosts.begin(), row.hosts.end(), rng_);
    a.rows.push_back(std::move(row));
  }
  return a;
}

// ---- A3C ----

A3cTargets a3c_targets(const EpisodeBuffer& buffer) {
  A3cTargets t;
  const std::size_t m = buffer.size();
  t.advantage.resize(m);
  t.next_value.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    t.next_value[j] = j + 1 < m ? buffer[j + 1].record.value : 0.0;
    t.advantage[j] = buffer[j].loss_pg + t.next_value[j];
  }
  return t;
}

double a3c_objective(const nn::R2N2Params& params, const EpisodeBuffer& buffer, const A3cTargets& targets) {
  nn::Hidden hidden = params.initial_hidden();
  double j_total = 0.0;
  for (std::size_t j = 0; j < buffer.size(); ++j) {
    const auto rec = nn::forward(params, buffer[j].record.x, hidden);
    const double td = buffer[j].loss_pg + targets.next_value[j] - rec.value;
    j_total += targets.advantage[j] * sum_log_prob(rec.policy, buffer[j].choices) + td * td;
  }
  return j_total;
}

A3cGradient a3c_accumulate(const nn::R2N2Params& params, const EpisodeBuffer& buffer) {
  if (buffer.empty()) throw InvariantViolation("cannot accumulate an empty episode");
  const auto targets = a3c_targets(buffer);
  A3cGradient out{params.zeros_like(), 0.0};
  std::vector<nn::ForwardRecord> records;
  std::vector<nn::HeadGrad> seeds;
  records.reserve(buffer.size());
  seeds.reserve(buffer.size());
  for (std::size_t j = 0; j < buffer.size(); ++j) {
    const auto& step = buffer[j];
    nn::HeadGrad g{Eigen::MatrixXd::Zero(step.record.policy.rows(), step.record.policy.cols()), 0.0};
    add_log_prob_grad(step.record.policy, step.choices, targets.advantage[j], g.dlogits);
    const double td = step.loss_pg + targets.next_value[j] - step.record.value;
    g.dvalue = -2.0 * td;
    out.objective += targets.advantage[j] * sum_log_prob(step.record.policy, step.choices) + td * td;
    records.push_back(step.record);
    seeds.push_back(std::move(g));
  }
  nn::backward(params, records, seeds, out.grads);
  return out;
}

A3cAgent::A3cAgent(std::shared_ptr<GlobalParamStore> store, int agent_index)
    : store_(std::move(store)), agent_(agent_index), local_(store_->snapshot()) {
  hidden_ = local_.initial_hidden();
}

Decision A3cAgent::decide(const DecisionContext& ctx) {
  if (!ctx.state) throw InvariantViolation("a3c needs the state matrices");
  A3cStep step;
  step.record = nn::forward(local_, *ctx.state, hidden_);
  pending_rows_ = ctx.state->row_tasks;
  auto ranking = nn::policy_to_ranking(step.record.policy, pending_rows_);
  buffer_.push_back(std::move(step));
  return ranking;
}

void A3cAgent::on_commit(const DecisionContext&, const csm::ConstrainedAction& action) {
  buffer_.back().choices = committed_rows(pending_rows_, action);
}

void A3cAgent::observe(double loss_pg, double penalty) {
  if (buffer_.empty()) return;
  buffer_.back().loss_pg = loss_pg;
  buffer_.back().penalty = penalty;
}

bool A3cAgent::end_episode() {
  hidden_ = local_.initial_hidden();
  if (buffer_.empty()) return false;
  bool updated = false;
  if (learning_) {
    const auto grad = a3c_accumulate(local_, buffer_);
    double loss = 0.0, pen = 0.0;
    for (const auto& s : buffer_) {
      loss += s.loss_pg;
      pen += s.penalty;
    }
    const auto m = static_cast<double>(buffer_.size());
    local_ = store_->apply(grad.grads, loss / m, pen / m, agent_);
    updated = true;
  }
  buffer_.clear();
  return updated;
}

void A3cAgent::save_checkpoint(const std::filesystem::path& path) const {
  nn::save_params(path, store_->snapshot());
}

// ---- REINFORCE ----

std::vector<double> returns_to_go(const std::vector<PgStep>& steps) {
  std::vector<double> g(steps.size());
  double acc = 0.0;
  for (std::size_t j = steps.size(); j-- > 0;) {
    acc += steps[j].loss_pg;
    g[j] = acc;
  }
  return g;
}

nn::MlpParams reinforce_gradient(const nn::MlpParams& params, const std::vector<PgStep>& steps,
                                 const std::vector<double>& baseline, int rows, int hosts) {
  if (baseline.size() < steps.size()) throw InvariantViolation("baseline shorter than episode");
  const auto g = returns_to_go(steps);
  nn::MlpParams grads = params.zeros_like();
  for (std::size_t j = 0; j < steps.size(); ++j) {
    const double adv = g[j] - baseline[j];
    if (adv == 0.0) continue;
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(rows, hosts);
    add_log_prob_grad(steps[j].policy, steps[j].choices, adv, dlogits);
    Eigen::VectorXd dout(rows * hosts);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < hosts; ++c) dout(r * hosts + c) = dlogits(r, c);
    nn::mlp_backward(params, steps[j].record, dout, grads);
  }
  return grads;
}

namespace {

std::vector<int> mlp_widths(const StateShape& shape, int hidden) {
  return {shape.input_size(), hidden, hidden, shape.max_tasks * shape.hosts};
}

void check_mlp_shape(const nn::MlpParams& p, const StateShape& shape) {
  if (p.input_size() != shape.input_size() || p.output_size() != shape.max_tasks * shape.hosts) {
    throw ConfigError("network does not match the cluster shape");
  }
}

}  // namespace

ReinforceScheduler::ReinforceScheduler(const StateShape& shape, PolicyGradientOptions opts)
    : ReinforceScheduler(nn::MlpParams::init(mlp_widths(shape, opts.hidden), opts.seed), shape, opts) {}

ReinforceScheduler::ReinforceScheduler(nn::MlpParams params, const StateShape& shape,
                                       PolicyGradientOptions opts)
    : shape_(shape), opts_(opts), params_(std::move(params)), lr_(opts.learning_rate, 10, 0.1, opts.min_learning_rate) {
  check_mlp_shape(params_, shape_);
}

Decision ReinforceScheduler::decide(const DecisionContext& ctx) {
  if (!ctx.state) throw InvariantViolation("reinforce needs the state matrices");
  PgStep step;
  step.record = nn::mlp_forward(params_, ctx.state->flatten());
  step.policy = nn::softmax_rows(nn::as_rows(step.record.activations.back(), shape_.max_tasks, shape_.hosts));
  pending_rows_ = ctx.state->row_tasks;
  auto ranking = nn::policy_to_ranking(step.policy, pending_rows_);
  steps_.push_back(std::move(step));
  return ranking;
}

void ReinforceScheduler::on_commit(const DecisionContext&, const csm::ConstrainedAction& action) {
  steps_.back().choices = committed_rows(pending_rows_, action);
}

void ReinforceScheduler::observe(double loss_pg, double penalty) {
  if (steps_.empty()) return;
  steps_.back().loss_pg = loss_pg;
  steps_.back().penalty = penalty;
}

bool ReinforceScheduler::end_episode() {
  if (steps_.empty()) return false;
  bool updated = false;
  if (learning_) {
    const auto g = returns_to_go(steps_);
    // Plain Monte Carlo weights by default; the optional per-position running
    // baseline is seeded by the first episode.
    if (baseline_.size() < g.size()) baseline_.resize(g.size(), 0.0);
    if (opts_.running_baseline && !baseline_ready_) {
      std::copy(g.begin(), g.end(), baseline_.begin());
      baseline_ready_ = true;
    }
    auto grads = reinforce_gradient(params_, steps_, baseline_, shape_.max_tasks, shape_.hosts);
    for (std::size_t j = 0; opts_.running_baseline && j < g.size(); ++j) {
      baseline_[j] = opts_.baseline_decay * baseline_[j] + (1.0 - opts_.baseline_decay) * g[j];
    }
    double scale = lr_.value();
    if (opts_.grad_clip > 0.0) {
      const double norm = std::sqrt(nn::squared_norm(grads));
      if (norm > opts_.grad_clip) scale *= opts_.grad_clip / norm;
    }
    nn::axpy(params_, -scale, grads);
    if (!nn::all_finite(params_)) throw NumericalFailure("reinforce parameters became non-finite");
    double loss = 0.0, pen = 0.0;
    for (const auto& s : steps_) {
      loss += s.loss_pg;
      pen += s.penalty;
    }
    const auto m = static_cast<double>(steps_.size());
    log_.push_back({static_cast<int>(log_.size()) + 1, lr_.value(), loss / m, pen / m, 0});
    lr_.record(-loss / m);
    updated = true;
  }
  steps_.clear();
  return updated;
}

void ReinforceScheduler::save_checkpoint(const std::filesystem::path& path) const {
  nn::save_params(path, params_);
}

// ---- Double DQN ----

DqnScheduler::DqnScheduler(const StateShape& shape, DqnOptions opts)
    : DqnScheduler(nn::MlpParams::init(mlp_widths(shape, opts.hidden), opts.seed), shape, opts) {}

DqnScheduler::DqnScheduler(nn::MlpParams params, const StateShape& shape, DqnOptions opts)
    : shape_(shape), opts_(opts), online_(std::move(params)), rng_(opts.seed ^ 0x9e3779b97f4a7c15ULL) {
  check_mlp_shape(online_, shape_);
  target_ = online_;
  if (opts_.replay_capacity == 0 || opts_.batch_size == 0) throw ConfigError("dqn replay and batch must be positive");
}

double DqnScheduler::epsilon() const {
  if (!learning_) return 0.0;
  const double horizon = std::max(1.0, 0.5 * opts_.total_steps);
  const double frac = std::min(1.0, decisions_ / horizon);
  return opts_.epsilon_start + (opts_.epsilon_end - opts_.epsilon_start) * frac;
}

Eigen::MatrixXd DqnScheduler::q_values(const Eigen::VectorXd& state) const {
  return nn::as_rows(nn::mlp_forward(online_, state).activations.back(), shape_.max_tasks, shape_.hosts);
}

Decision DqnScheduler::decide(const DecisionContext& ctx) {
  if (!ctx.state) throw InvariantViolation("dqn needs the state matrices");
  Eigen::VectorXd x = ctx.state->flatten();
  const auto& rows = ctx.state->row_tasks;

  if (pending_) {
    pending_->next_state = x;
    pending_->next_rows = static_cast<int>(rows.size());
    if (learning_) {
      if (replay_.size() < opts_.replay_capacity) {
        replay_.push_back(std::move(*pending_));
      } else {
        replay_[replay_next_] = std::move(*pending_);
      }
      replay_next_ = (replay_next_ + 1) % opts_.replay_capacity;
      train_batch();
    }
    pending_.reset();
  }

  const double eps = epsilon();
  const Eigen::MatrixXd q = q_values(x);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  csm::RankedAction a;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    csm::RankedRow row{rows[j], {}};
    if (eps > 0.0 && coin(rng_) < eps) {
      row.hosts.resize(static_cast<std::size_t>(shape_.hosts));
      std::iota(row.hosts.begin(), row.hosts.end(), 0);
      std::shuffle(row.hosts.begin(), row.hosts.end(), rng_);
    } else {
      row.hosts = nn::rank_row(q.row(static_cast<Eigen::Index>(j)));
    }
    a.rows.push_back(std::move(row));
  }
  if (learning_) ++decisions_;
  pending_ = Transition{std::move(x), {}, 0.0, std::nullopt, 0};
  pending_rows_ = rows;
  return a;
}

void DqnScheduler::on_commit(const DecisionContext&, const csm::ConstrainedAction& action) {
  if (pending_) pending_->choices = committed_rows(pending_rows_, action);
}

void DqnScheduler::observe(double loss_pg, double) {
  if (pending_) pending_->reward = -loss_pg;
}

bool DqnScheduler::end_episode() {
  const bool updated = episode_updates_ > 0;
  episode_updates_ = 0;
  return updated;
}

void DqnScheduler::train_batch() {
  if (replay_.empty()) return;
  const int n = shape_.hosts;
  const std::size_t batch = std::min(opts_.batch_size, replay_.size());
  std::uniform_int_distribution<std::size_t> pick(0, replay_.size() - 1);
  nn::MlpParams grads = online_.zeros_like();
  for (std::size_t b = 0; b < batch; ++b) {
    const Transition& tr = replay_[pick(rng_)];
    if (tr.choices.empty()) continue;
    double bootstrap = 0.0;
    if (opts_.discount != 0.0 && tr.next_state && tr.next_rows > 0) {
      const Eigen::MatrixXd q_next_online = q_values(*tr.next_state);
      const Eigen::MatrixXd q_next_target = nn::as_rows(
          nn::mlp_forward(target_, *tr.next_state).activations.back(), shape_.max_tasks, n);
      for (int r = 0; r < tr.next_rows; ++r) {
        Eigen::Index best = 0;
        q_next_online.row(r).maxCoeff(&best);
        bootstrap += q_next_target(r, best);
      }
      bootstrap /= tr.next_rows;
    }
    const double y = tr.reward + opts_.discount * bootstrap;
    const auto rec = nn::mlp_forward(online_, tr.state);
    const Eigen::VectorXd& q = rec.activations.back();
    Eigen::VectorXd dout = Eigen::VectorXd::Zero(q.size());
    const double w = 2.0 / (static_cast<double>(tr.choices.size()) * static_cast<double>(batch));
    for (const auto& [row, host] : tr.choices) {
      const Eigen::Index k = static_cast<Eigen::Index>(row) * n + host;
      dout(k) += w * (q(k) - y);
    }
    nn::mlp_backward(online_, rec, dout, grads);
  }
  double scale = opts_.learning_rate;
  if (opts_.grad_clip > 0.0) {
    const double norm = std::sqrt(nn::squared_norm(grads));
    if (norm > opts_.grad_clip) scale *= opts_.grad_clip / norm;
  }
  nn::axpy(online_, -scale, grads);
  if (!nn::all_finite(online_)) throw NumericalFailure("dqn parameters became non-finite");
  ++train_steps_;
  ++episode_updates_;
  if (train_steps_ % opts_.target_sync == 0) target_ = online_;
}

void DqnScheduler::save_checkpoint(const std::filesystem::path& path) const {
  nn::save_params(path, online_);
}

}  // namespace edgesched::sched
