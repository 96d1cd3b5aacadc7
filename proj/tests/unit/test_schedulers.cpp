#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <thread>

#include "edgesched/core/errors.hpp"
#include "edgesched/harness/environment.hpp"
#include "edgesched/harness/experiment.hpp"
#include "edgesched/sched/heuristics.hpp"
#include "edgesched/sched/learners.hpp"
#include "edgesched/sim/power.hpp"
#include "support/gradcheck.hpp"

using namespace edgesched;
using namespace edgesched::sched;

namespace {

Host linear_host(HostId id, double idle, double step) {
  Host h;
  h.id = id;
  h.capacity = {1000, 8000, 1000, 1000};
  for (std::size_t k = 0; k < kPowerPoints; ++k) h.power_curve[k] = idle + step * static_cast<double>(k);
  h.cost_rate = 1.0;
  return h;
}

Task make_task(TaskId id, double cpu, double ram, std::optional<HostId> on = std::nullopt) {
  Task t;
  t.id = id;
  t.total_duration = 1800;
  t.demand = {cpu, ram, 1, 1};
  t.assigned_host = on;
  return t;
}

struct Fixture {
  std::vector<Host> hosts;
  TaskMap tasks;
  TaskSets sets;
  History history;
  std::optional<StateMatrices> state;

  DecisionContext ctx() const {
    DecisionContext c;
    c.hosts = &hosts;
    c.tasks = &tasks;
    c.sets = &sets;
    c.history = &history;
    c.state = state ? &*state : nullptr;
    return c;
  }
  void running(Task t, bool migratable = true) {
    sets.active.insert(t.id);
    if (migratable) sets.migratable.insert(t.id);
    tasks[t.id] = std::move(t);
  }
  void arriving(Task t) {
    sets.active.insert(t.id);
    sets.arriving.insert(t.id);
    tasks[t.id] = std::move(t);
  }
  void host_history(std::size_t h, std::vector<double> series) {
    for (double v : series) history.record_host(h, v);
  }
};

const csm::Placement& placement_of(const Decision& d, TaskId id) {
  const auto& a = std::get<csm::ConstrainedAction>(d);
  const auto* p = a.find(id);
  REQUIRE(p);
  return *p;
}

// One task row on two hosts; the first host is the frugal one.
StateMatrices steady_state() {
  StateMatrices s;
  s.hosts = Eigen::MatrixXd::Zero(2, kHostFeatures);
  s.hosts(0, 8) = 0.1;
  s.hosts(0, 9) = 0.1;
  s.hosts(1, 8) = 1.0;
  s.hosts(1, 9) = 1.0;
  s.continuing = Eigen::MatrixXd::Zero(1, kTaskFeatures + 2);
  s.new_tasks = Eigen::MatrixXd::Zero(1, kTaskFeatures);
  s.new_tasks.row(0) << 0.5, 0.5, 0.5, 0.5;
  s.row_tasks = {1};
  s.new_count = 1;
  return s;
}

csm::ConstrainedAction commit_new(TaskId id, HostId host, std::size_t hosts) {
  csm::ConstrainedAction a;
  a.host_count = hosts;
  csm::Placement p;
  p.task = id;
  p.role = csm::Role::New;
  p.host = host;
  a.placements = {p};
  return a;
}

// An MLP whose only nonzero parameters are the output biases behaves as a
// table of logits: hidden activations are tanh(0) and carry no gradient.
nn::MlpParams logit_table(const StateShape& shape, const Eigen::VectorXd& logits) {
  auto p = nn::MlpParams::init({shape.input_size(), 4, 4, shape.max_tasks * shape.hosts}, 1);
  nn::set_zero(p);
  p.layers.back().b = logits;
  return p;
}

}  // namespace

// ---- heuristics ----

TEST_CASE("local regression forecast") {
  const std::vector<double> line{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(local_regression_forecast(line) == doctest::Approx(0.6).epsilon(1e-12));
  const std::vector<double> flat{0.3, 0.3, 0.3};
  CHECK(local_regression_forecast(flat) == doctest::Approx(0.3).epsilon(1e-12));
  const std::vector<double> two{0.5, 0.7};
  CHECK(local_regression_forecast(two) == doctest::Approx(0.9).epsilon(1e-12));
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(local_regression_forecast(one), DomainError);

  LrMmtScheduler lr;
  const std::vector<double> rising{0.7, 0.8, 0.9, 1.0};
  CHECK(lr.overloaded(rising));
  CHECK_FALSE(lr.overloaded(flat));
  CHECK_FALSE(lr.overloaded(one));
}

TEST_CASE("median, MAD and correlation") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  const std::vector<double> ramp{0.2, 0.4, 0.6, 0.8, 1.0};
  CHECK(median_absolute_deviation(ramp) == doctest::Approx(0.2).epsilon(1e-12));
  const std::vector<double> flat{0.5, 0.5, 0.5};
  CHECK(median_absolute_deviation(flat) == 0);

  MadMcScheduler mad;
  CHECK(mad.threshold(flat) == 1.0);
  CHECK(mad.threshold(ramp) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mad.threshold(std::vector<double>{}) == 1.0);

  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  CHECK(pearson(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(a, c) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson(a, flat) == 0);
}

TEST_CASE("quiet cluster gives the identity action") {
  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  f.running(make_task(1, 200, 100, 0));
  f.running(make_task(2, 300, 100, 1));
  f.host_history(0, {0.2, 0.2, 0.2});
  f.host_history(1, {0.3, 0.3, 0.3});
  LrMmtScheduler lr;
  MadMcScheduler mad;
  for (Scheduler* s : std::initializer_list<Scheduler*>{&lr, &mad}) {
    const auto d = s->decide(f.ctx());
    CHECK(*placement_of(d, 1).host == 0);
    CHECK(*placement_of(d, 2).host == 1);
  }
}

TEST_CASE("LR-MMT moves the smallest image off a host trending past capacity") {
  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  f.running(make_task(1, 450, 100, 0));
  f.running(make_task(2, 450, 2000, 0));
  f.host_history(0, {0.7, 0.8, 0.9, 1.0});
  f.host_history(1, {0.0, 0.0, 0.0, 0.0});
  const auto d = LrMmtScheduler{}.decide(f.ctx());
  CHECK(*placement_of(d, 1).host == 1);
  CHECK(*placement_of(d, 2).host == 0);
}

TEST_CASE("BFD places a new task where power rises least") {
  Fixture f;
  f.hosts = {linear_host(0, 10, 20), linear_host(1, 50, 5)};
  f.arriving(make_task(1, 100, 100));
  const double steep = interpolate_power(f.hosts[0], 0.1) - interpolate_power(f.hosts[0], 0.0);
  const double gentle = interpolate_power(f.hosts[1], 0.1) - interpolate_power(f.hosts[1], 0.0);
  REQUIRE(gentle < steep);
  CHECK(*placement_of(LrMmtScheduler{}.decide(f.ctx()), 1).host == 1);
  CHECK(*placement_of(MadMcScheduler{}.decide(f.ctx()), 1).host == 1);

  // Too big for anything: deferred.
  f.arriving(make_task(2, 5000, 100));
  const auto& p = placement_of(LrMmtScheduler{}.decide(f.ctx()), 2);
  CHECK_FALSE(p.host);
}

TEST_CASE("MAD-MC relieves an overloaded host") {
  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  f.running(make_task(1, 700, 100, 0));
  f.host_history(0, {0.2, 0.4, 0.6, 0.8, 1.0});
  f.host_history(1, {0.0, 0.0, 0.0, 0.0, 0.0});
  // Single task on the flagged host: it is the one selected.
  CHECK(*placement_of(MadMcScheduler{}.decide(f.ctx()), 1).host == 1);
}

TEST_CASE("MAD-MC selects the task most correlated with its neighbours") {
  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  for (TaskId id : {1, 2, 3}) f.running(make_task(id, 300, 100, 0));
  f.host_history(0, {0.5, 0.6, 0.7, 0.8, 0.9});
  f.host_history(1, {0.0, 0.0, 0.0, 0.0, 0.0});
  const std::map<TaskId, std::vector<double>> usage{
      {1, {1, 2, 3, 4}}, {2, {4, 3, 2, 1}}, {3, {2, 4, 6, 9}}};
  for (const auto& [id, s] : usage)
    for (double v : s) f.history.record_task(id, v);
  // Neighbour sums: task 1 sees {6,7,8,10} (r ~ 0.98), task 2 sees a falling
  // series and task 3 a constant one.
  const auto d = MadMcScheduler{}.decide(f.ctx());
  CHECK(*placement_of(d, 1).host == 1);
  CHECK(*placement_of(d, 2).host == 0);
  CHECK(*placement_of(d, 3).host == 0);
}

// ---- learning rate ----

TEST_CASE("adaptive learning rate") {
  AdaptiveLearningRate few(1e-2);
  for (int i = 0; i < 10; ++i) CHECK_FALSE(few.record(0.5));
  CHECK(few.value() == 1e-2);

  AdaptiveLearningRate flat(1e-2);
  for (int i = 0; i < 10; ++i) flat.record(0.5);
  CHECK(flat.record(0.5));
  CHECK(flat.value() == doctest::Approx(1e-3).epsilon(1e-15));

  AdaptiveLearningRate swing(1e-2);
  for (int i = 0; i < 40; ++i) CHECK_FALSE(swing.record(i % 2 ? 0.5 : 0.0));
  CHECK(swing.value() == 1e-2);

  AdaptiveLearningRate floored(1e-2, 10, 0.1, 1e-3);
  for (int i = 0; i < 60; ++i) floored.record(0.25);
  CHECK(floored.value() == doctest::Approx(1e-3).epsilon(1e-15));

  // A floor above the starting rate never raises it.
  AdaptiveLearningRate low(1e-4, 10, 0.1, 1e-3);
  CHECK(low.value() == 1e-4);
}

// ---- A3C ----

namespace {

EpisodeBuffer tiny_episode(const nn::R2N2Params& p, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Hidden h = p.initial_hidden();
  EpisodeBuffer buf;
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd x(p.shape.input_size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = u(rng);
    A3cStep s;
    s.record = nn::forward(p, x, h);
    s.choices = {{0, static_cast<HostId>(rng() % 2)}, {1, static_cast<HostId>(rng() % 2)}};
    s.loss_pg = 0.5 + 0.5 * u(rng);
    buf.push_back(std::move(s));
  }
  return buf;
}

}  // namespace

TEST_CASE("a3c gradient matches finite differences of its objective") {
  const StateShape shape{2, 2};
  const auto p = nn::R2N2Params::init(shape, 4, 5);
  for (int steps : {1, 3}) {
    const auto buf = tiny_episode(p, steps, 11 + static_cast<std::uint64_t>(steps));
    const auto grad = a3c_accumulate(p, buf);
    const auto targets = a3c_targets(buf);
    CHECK(grad.objective == doctest::Approx(a3c_objective(p, buf, targets)).epsilon(1e-12));
    const auto bad = testsupport::gradient_check<nn::R2N2Params>(
        p, grad.grads, [&](const nn::R2N2Params& q) { return a3c_objective(q, buf, targets); });
    for (const auto& b : bad) MESSAGE(b.tensor << "[" << b.index << "] " << b.analytic << " vs " << b.numeric);
    CHECK(bad.empty());
  }
}

TEST_CASE("a3c targets and the zero case") {
  const StateShape shape{2, 2};
  auto p = nn::R2N2Params::init(shape, 4, 6);
  auto buf = tiny_episode(p, 3, 2);
  const auto t = a3c_targets(buf);
  CHECK(t.next_value[0] == buf[1].record.value);
  CHECK(t.next_value[2] == 0);
  CHECK(t.advantage[1] == buf[1].loss_pg + buf[2].record.value);

  p.critic.W.setZero();
  p.critic.b.setZero();
  buf = tiny_episode(p, 3, 2);
  for (auto& s : buf) s.loss_pg = 0;
  const auto g = a3c_accumulate(p, buf);
  CHECK(nn::squared_norm(g.grads) == 0);
  CHECK(g.objective == 0);

  CHECK_THROWS_AS(a3c_accumulate(p, EpisodeBuffer{}), InvariantViolation);
}

TEST_CASE("log-probability is taken at the committed host") {
  const StateShape shape{1, 2};
  auto store = std::make_shared<GlobalParamStore>(nn::R2N2Params::init(shape, 8, 3), AdaptiveLearningRate{});
  A3cAgent agent(store);
  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  f.state = steady_state();
  const auto d = std::get<csm::RankedAction>(agent.decide(f.ctx()));
  const HostId second = d.rows[0].hosts[1];
  agent.on_commit(f.ctx(), commit_new(1, second, 2));
  const auto& step = agent.buffer().back();
  REQUIRE(step.choices.size() == 1);
  CHECK(step.choices[0] == std::pair<int, HostId>{0, second});
  CHECK(sum_log_prob(step.record.policy, step.choices) == std::log(step.record.policy(0, second)));
  CHECK(step.record.policy(0, second) <= step.record.policy(0, d.rows[0].hosts[0]));

  // A deferred task contributes no row.
  csm::ConstrainedAction none = commit_new(1, 0, 2);
  none.placements[0].host.reset();
  CHECK(committed_rows({1}, none).empty());
}

TEST_CASE("global updates are order independent") {
  const StateShape shape{2, 2};
  const auto theta0 = nn::R2N2Params::init(shape, 4, 7);
  // A window this long never adapts, so the rate stays fixed.
  auto fixed_rate = [] { return AdaptiveLearningRate(0.5, 1000, 0.1); };

  GlobalParamStore zero(theta0, fixed_rate());
  const auto same = zero.apply(theta0.zeros_like(), 0, 0);
  CHECK(nn::squared_norm(same) == nn::squared_norm(theta0));

  std::vector<nn::R2N2Params> grads;
  for (std::uint64_t s = 0; s < 20; ++s) grads.push_back(nn::R2N2Params::init(shape, 4, 100 + s));

  GlobalParamStore ab(theta0, fixed_rate()), ba(theta0, fixed_rate());
  ab.apply(grads[0], 0, 0);
  const auto x = ab.apply(grads[1], 0, 0);
  ba.apply(grads[1], 0, 0);
  const auto y = ba.apply(grads[0], 0, 0);
  auto diff = x;
  nn::axpy(diff, -1.0, y);
  CHECK(nn::squared_norm(diff) < 1e-24);

  // Sequential oracle against four threads pushing five gradients each.
  auto oracle = theta0;
  for (const auto& g : grads) nn::axpy(oracle, -0.5, g);
  GlobalParamStore shared(theta0, fixed_rate());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int k = 0; k < 5; ++k) shared.apply(grads[static_cast<std::size_t>(t * 5 + k)], 0, 0, t);
    });
  }
  for (auto& th : threads) th.join();
  auto delta = shared.snapshot();
  nn::axpy(delta, -1.0, oracle);
  CHECK(nn::squared_norm(delta) < 1e-20);
  CHECK(shared.update_count() == 20);
}

TEST_CASE("the same episode pushed twice moves the parameters twice as far") {
  const StateShape shape{2, 2};
  const auto theta0 = nn::R2N2Params::init(shape, 4, 8);
  const auto buf = tiny_episode(theta0, 1, 4);
  const auto g = a3c_accumulate(theta0, buf);
  GlobalParamStore once(theta0, AdaptiveLearningRate(0.01, 1000)), twice(theta0, AdaptiveLearningRate(0.01, 1000));
  auto a = once.apply(g.grads, 0, 0);
  twice.apply(g.grads, 0, 0);
  auto b = twice.apply(g.grads, 0, 0);
  nn::axpy(a, -1.0, theta0);
  nn::axpy(b, -1.0, theta0);
  nn::axpy(b, -2.0, a);
  CHECK(nn::squared_norm(b) < 1e-24);
}

TEST_CASE("gradient clipping bounds the step") {
  const StateShape shape{2, 2};
  const auto theta0 = nn::R2N2Params::init(shape, 4, 9);
  auto g = nn::R2N2Params::init(shape, 4, 10);
  GlobalParamStore store(theta0, AdaptiveLearningRate(1.0, 1000), 0.25);
  auto after = store.apply(g, 0, 0);
  nn::axpy(after, -1.0, theta0);
  CHECK(std::sqrt(nn::squared_norm(after)) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("a3c prefers the frugal host under an energy-only loss") {
  // Loss is 0.2 on the frugal host and 0.9 on the hungry one.
  int majority = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const StateShape shape{1, 2};
    auto store = std::make_shared<GlobalParamStore>(nn::R2N2Params::init(shape, 8, seed),
                                                    AdaptiveLearningRate(1e-2, 10, 0.1, 1e-3), 100.0);
    A3cAgent agent(store);
    Fixture f;
    f.hosts = {linear_host(0, 10, 1), linear_host(1, 100, 10)};
    f.state = steady_state();
    int frugal = 0, counted = 0;
    for (int e = 0; e < 300; ++e) {
      for (int i = 0; i < 12; ++i) {
        const auto d = std::get<csm::RankedAction>(agent.decide(f.ctx()));
        const HostId h = d.rows[0].hosts[0];
        agent.on_commit(f.ctx(), commit_new(1, h, 2));
        agent.observe(h == 0 ? 0.2 : 0.9, 0);
        if (e >= 250) {
          frugal += h == 0;
          ++counted;
        }
      }
      agent.end_episode();
    }
    MESSAGE("seed " << seed << ": frugal host first in " << frugal << "/" << counted);
    majority += 2 * frugal > counted;
  }
  CHECK(majority == 4);
}

// ---- REINFORCE ----

TEST_CASE("reinforce: zero return, ascent direction") {
  const StateShape shape{1, 2};
  Eigen::VectorXd logits(2);
  logits << 0.3, -0.1;
  const auto p = logit_table(shape, logits);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(shape.input_size());

  PgStep step;
  step.record = nn::mlp_forward(p, x);
  step.policy = nn::softmax_rows(nn::as_rows(step.record.activations.back(), 1, 2));
  step.choices = {{0, 0}};
  step.loss_pg = 0;
  CHECK(nn::squared_norm(reinforce_gradient(p, {step}, {0.0}, 1, 2)) == 0);

  // Better than the baseline: the committed host gains probability.
  step.loss_pg = 0.2;
  auto better = p;
  nn::axpy(better, -0.1, reinforce_gradient(p, {step}, {0.5}, 1, 2));
  const auto pb = nn::softmax_rows(nn::as_rows(nn::mlp_forward(better, x).activations.back(), 1, 2));
  CHECK(pb(0, 0) > step.policy(0, 0));

  auto worse = p;
  nn::axpy(worse, -0.1, reinforce_gradient(p, {step}, {0.0}, 1, 2));
  const auto pw = nn::softmax_rows(nn::as_rows(nn::mlp_forward(worse, x).activations.back(), 1, 2));
  CHECK(pw(0, 0) < step.policy(0, 0));

  CHECK(returns_to_go({step, step, step}) == std::vector<double>{0.6000000000000001, 0.4, 0.2});
}

TEST_CASE("reinforce on a two-armed bandit follows the softmax oracle") {
  const StateShape shape{1, 2};
  Eigen::VectorXd logits(2);
  logits << 0.2, 0.0;
  PolicyGradientOptions opts;
  opts.learning_rate = 0.05;
  ReinforceScheduler pg(logit_table(shape, logits), shape, opts);

  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  StateMatrices s = steady_state();
  f.state = s;
  const double loss[2] = {0.7, 0.3};

  // Tabular oracle: logits -= lr * sum_j G_j (onehot(a) - pi).
  Eigen::Vector2d oracle = logits;
  AdaptiveLearningRate lr(opts.learning_rate);
  int arm1 = 0;
  for (int e = 0; e < 60; ++e) {
    const Eigen::Vector2d pi = (oracle.array() - oracle.maxCoeff()).exp() /
                               (oracle.array() - oracle.maxCoeff()).exp().sum();
    const int a = pi(1) > pi(0) ? 1 : 0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int j = 0; j < 6; ++j) {
      const auto d = std::get<csm::RankedAction>(pg.decide(f.ctx()));
      REQUIRE(d.rows[0].hosts[0] == a);
      pg.on_commit(f.ctx(), commit_new(1, a, 2));
      pg.observe(loss[a], 0);
      Eigen::Vector2d onehot = Eigen::Vector2d::Zero();
      onehot(a) = 1;
      grad += loss[a] * (6 - j) * (onehot - pi);
    }
    oracle -= lr.value() * grad;
    lr.record(-loss[a]);
    pg.end_episode();
    if (e >= 40) arm1 += a;
    REQUIRE((pg.params().layers.back().b - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }
  // The cheaper arm is preferred most of the time once trained.
  CHECK(arm1 > 10);
}

// ---- DQN ----

TEST_CASE("dqn exploration and greedy ranking") {
  const StateShape shape{1, 3};
  DqnOptions opts;
  opts.epsilon_start = opts.epsilon_end = 1.0;
  DqnScheduler dqn(shape, opts);
  CHECK(dqn.epsilon() == 1.0);

  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10), linear_host(2, 10, 10)};
  StateMatrices s;
  s.hosts = Eigen::MatrixXd::Zero(3, kHostFeatures);
  s.continuing = Eigen::MatrixXd::Zero(1, kTaskFeatures + 3);
  s.new_tasks = Eigen::MatrixXd::Constant(1, kTaskFeatures, 0.5);
  s.row_tasks = {1};
  s.new_count = 1;
  f.state = s;

  dqn.set_learning(false);
  CHECK(dqn.epsilon() == 0.0);
  const auto greedy = std::get<csm::RankedAction>(dqn.decide(f.ctx()));
  CHECK(greedy.rows[0].hosts == nn::rank_row(dqn.q_values(s.flatten()).row(0)));
  CHECK(std::get<csm::RankedAction>(dqn.decide(f.ctx())).rows[0].hosts == greedy.rows[0].hosts);

  dqn.set_learning(true);
  std::array<int, 3> first{};
  for (int i = 0; i < 3000; ++i) {
    const auto d = std::get<csm::RankedAction>(dqn.decide(f.ctx()));
    auto sorted = d.rows[0].hosts;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<HostId>{0, 1, 2});
    ++first[static_cast<std::size_t>(d.rows[0].hosts[0])];
  }
  for (int c : first) CHECK(std::abs(c - 1000) < 150);

  DqnOptions decay;
  decay.total_steps = 100;
  DqnScheduler linear(shape, decay);
  CHECK(linear.epsilon() == 1.0);
}

TEST_CASE("dqn action values approach the negated bandit losses") {
  const StateShape shape{1, 2};
  DqnOptions opts;
  opts.discount = 0.0;
  opts.epsilon_start = opts.epsilon_end = 1.0;
  opts.learning_rate = 0.02;
  opts.batch_size = 16;
  DqnScheduler dqn(shape, opts);
  Fixture f;
  f.hosts = {linear_host(0, 10, 10), linear_host(1, 10, 10)};
  f.state = steady_state();
  const double loss[2] = {0.25, 0.75};
  for (int i = 0; i < 1500; ++i) {
    const auto d = std::get<csm::RankedAction>(dqn.decide(f.ctx()));
    const HostId h = d.rows[0].hosts[0];
    dqn.on_commit(f.ctx(), commit_new(1, h, 2));
    dqn.observe(loss[h], 0);
  }
  CHECK(dqn.train_steps() > 1000);
  const auto q = dqn.q_values(f.state->flatten());
  CHECK(q(0, 0) == doctest::Approx(-0.25).epsilon(0.05 / 0.25));
  CHECK(q(0, 1) == doctest::Approx(-0.75).epsilon(0.05 / 0.75));
}

// ---- end to end ----

namespace {

// Re-checks every committed action against raw capacities.
class CapacityAudit final : public Scheduler {
 public:
  explicit CapacityAudit(Scheduler& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  bool needs_state() const override { return inner_.needs_state(); }
  Decision decide(const DecisionContext& ctx) override { return inner_.decide(ctx); }
  void on_commit(const DecisionContext& ctx, const csm::ConstrainedAction& a) override {
    std::vector<Resources> load(ctx.hosts->size());
    std::vector<bool> exempt(ctx.hosts->size(), false);
    for (const auto& p : a.placements) {
      if (!p.host) continue;
      const auto h = static_cast<std::size_t>(*p.host);
      load[h] += ctx.tasks->at(p.task).demand;
      if (p.role == csm::Role::Blocked || p.fallback) exempt[h] = true;
    }
    for (std::size_t h = 0; h < load.size(); ++h) {
      if (!exempt[h]) violations += load[h].fits_within((*ctx.hosts)[h].capacity) ? 0 : 1;
    }
    ++commits;
    inner_.on_commit(ctx, a);
  }
  void observe(double l, double p) override { inner_.observe(l, p); }
  bool end_episode() override { return inner_.end_episode(); }

  int commits = 0;
  int violations = 0;

 private:
  Scheduler& inner_;
};

}  // namespace

TEST_CASE("every scheduler commits suitable placements") {
  harness::ExperimentConfig cfg;
  cfg.norm_sample_intervals = 24;
  cfg.mean_new = 6;
  const auto table = harness::fit_norms(cfg);
  const auto cluster = harness::make_cluster(cfg);
  const StateShape shape{cluster.max_tasks, static_cast<int>(cluster.hosts.size())};

  auto store = std::make_shared<GlobalParamStore>(nn::R2N2Params::init(shape, 16, 1), AdaptiveLearningRate{});
  LrMmtScheduler lr;
  MadMcScheduler mad;
  RandomScheduler rnd(3);
  A3cAgent a3c(store);
  PolicyGradientOptions pgo;
  pgo.hidden = 16;
  ReinforceScheduler pg(shape, pgo);
  DqnOptions dqo;
  dqo.hidden = 16;
  DqnScheduler dqn(shape, dqo);

  for (Scheduler* s : std::initializer_list<Scheduler*>{&lr, &mad, &rnd, &a3c, &pg, &dqn}) {
    harness::Environment env(cluster, harness::make_workload(cfg, 5), table);
    CapacityAudit audit(*s);
    for (int i = 0; i < 48; ++i) {
      env.step(audit);
      if ((i + 1) % 12 == 0) audit.end_episode();
    }
    CHECK_MESSAGE(audit.violations == 0, s->name());
    CHECK(audit.commits == 48);
  }
}
