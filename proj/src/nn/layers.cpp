#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgesched/core/errors.hpp"
#include "edgesched/nn/nn.hpp"

namespace edgesched::nn {

namespace {

Eigen::MatrixXd uniform_matrix(int rows, int cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

double fan_bound(int fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::VectorXd tanh_v(const Eigen::VectorXd& a) { return a.array().tanh().matrix(); }

void check_finite(const Eigen::MatrixXd& m, const char* layer) {
  if (!m.allFinite()) throw NumericalFailure(std::string("non-finite activation in layer ") + layer);
}

void check_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvariantViolation(std::string("shape mismatch in ") + what);
  }
}

}  // namespace

Dense Dense::zeros(int in, int out) {
  return Dense{Eigen::MatrixXd::Zero(out, in), Eigen::MatrixXd::Zero(out, 1)};
}

Dense Dense::uniform(int in, int out, std::mt19937_64& rng) {
  const double b = fan_bound(in);
  Dense d;
  d.W = uniform_matrix(out, in, b, rng);
  d.b = uniform_matrix(out, 1, b, rng);
  return d;
}

Gru Gru::zeros(int w) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w, w);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Zero(w, 1);
  return Gru{m, m, v, m, m, v, m, m, v};
}

Gru Gru::uniform(int w, std::mt19937_64& rng) {
  const double b = fan_bound(w);
  Gru g;
  g.Wz = uniform_matrix(w, w, b, rng);
  g.Uz = uniform_matrix(w, w, b, rng);
  g.bz = uniform_matrix(w, 1, b, rng);
  g.Wr = uniform_matrix(w, w, b, rng);
  g.Ur = uniform_matrix(w, w, b, rng);
  g.br = uniform_matrix(w, 1, b, rng);
  g.Wc = uniform_matrix(w, w, b, rng);
  g.Uc = uniform_matrix(w, w, b, rng);
  g.bc = uniform_matrix(w, 1, b, rng);
  return g;
}

R2N2Params R2N2Params::init(const StateShape& shape, int hidden, std::uint64_t seed) {
  if (hidden < 1) throw ConfigError("hidden width must be positive");
  std::mt19937_64 rng(seed);
  R2N2Params p;
  p.shape = shape;
  p.hidden = hidden;
  p.dense1 = Dense::uniform(shape.input_size(), hidden, rng);
  p.dense2 = Dense::uniform(hidden, hidden, rng);
  for (auto& g : p.gru) g = Gru::uniform(hidden, rng);
  p.actor = Dense::uniform(hidden, shape.max_tasks * shape.hosts, rng);
  p.critic = Dense::uniform(hidden, 1, rng);
  return p;
}

R2N2Params R2N2Params::zeros(const StateShape& shape, int hidden) {
  R2N2Params p;
  p.shape = shape;
  p.hidden = hidden;
  p.dense1 = Dense::zeros(shape.input_size(), hidden);
  p.dense2 = Dense::zeros(hidden, hidden);
  for (auto& g : p.gru) g = Gru::zeros(hidden);
  p.actor = Dense::zeros(hidden, shape.max_tasks * shape.hosts);
  p.critic = Dense::zeros(hidden, 1);
  return p;
}

namespace {

template <class Ref, class P>
std::vector<Ref> r2n2_tensors(P& p) {
  std::vector<Ref> t;
  auto dense = [&](const std::string& n, auto& d) {
    t.push_back({n + ".W", &d.W});
    t.push_back({n + ".b", &d.b});
  };
  dense("dense1", p.dense1);
  dense("dense2", p.dense2);
  for (int l = 0; l < kGruLayers; ++l) {
    auto& g = p.gru[static_cast<std::size_t>(l)];
    const std::string n = "gru" + std::to_string(l + 1);
    t.push_back({n + ".Wz", &g.Wz});
    t.push_back({n + ".Uz", &g.Uz});
    t.push_back({n + ".bz", &g.bz});
    t.push_back({n + ".Wr", &g.Wr});
    t.push_back({n + ".Ur", &g.Ur});
    t.push_back({n + ".br", &g.br});
    t.push_back({n + ".Wc", &g.Wc});
    t.push_back({n + ".Uc", &g.Uc});
    t.push_back({n + ".bc", &g.bc});
  }
  dense("actor", p.actor);
  dense("critic", p.critic);
  return t;
}

}  // namespace

std::vector<TensorRef> R2N2Params::tensors() { return r2n2_tensors<TensorRef>(*this); }
std::vector<ConstTensorRef> R2N2Params::tensors() const { return r2n2_tensors<ConstTensorRef>(*this); }

Hidden R2N2Params::initial_hidden() const {
  Hidden h;
  for (auto& s : h) s = Eigen::VectorXd::Zero(hidden);
  return h;
}

ForwardRecord forward(const R2N2Params& p, const Eigen::VectorXd& input, Hidden& hidden) {
  if (input.size() != p.dense1.W.cols()) throw InvariantViolation("input size does not match network");
  static const char* const gru_names[kGruLayers] = {"gru1", "gru2", "gru3"};
  ForwardRecord rec;
  rec.x = input;
  check_finite(rec.x, "input");
  rec.h1 = tanh_v(p.dense1.W * rec.x + p.dense1.b);
  check_finite(rec.h1, "dense1");
  rec.h2 = tanh_v(p.dense2.W * rec.h1 + p.dense2.b);
  check_finite(rec.h2, "dense2");

  Eigen::VectorXd u = rec.h2;
  for (int l = 0; l < kGruLayers; ++l) {
    const auto li = static_cast<std::size_t>(l);
    const Gru& g = p.gru[li];
    GruStep& st = rec.gru[li];
    if (hidden[li].size() != p.hidden) throw InvariantViolation("hidden state size mismatch");
    st.input = u;
    st.s_prev = hidden[li];
    st.z = sigmoid(g.Wz * u + g.Uz * st.s_prev + g.bz);
    st.r = sigmoid(g.Wr * u + g.Ur * st.s_prev + g.br);
    st.c = tanh_v(g.Wc * u + g.Uc * st.r.cwiseProduct(st.s_prev) + g.bc);
    st.s_new = (1.0 - st.z.array()).matrix().cwiseProduct(st.s_prev) + st.z.cwiseProduct(st.c);
    check_finite(st.s_new, gru_names[l]);
    hidden[li] = st.s_new;
    u = st.s_new + st.input;
  }
  rec.top = u;
  const Eigen::VectorXd logits = p.actor.W * u + p.actor.b;
  check_finite(logits, "actor");
  rec.logits = as_rows(logits, p.shape.max_tasks, p.shape.hosts);
  rec.policy = softmax_rows(rec.logits);
  check_finite(rec.policy, "actor");
  rec.value = (p.critic.W * u + p.critic.b)(0);
  if (!std::isfinite(rec.value)) throw NumericalFailure("non-finite activation in layer critic");
  return rec;
}

ForwardRecord forward(const R2N2Params& p, const StateMatrices& state, Hidden& hidden) {
  return forward(p, state.flatten(), hidden);
}

void backward(const R2N2Params& p, std::span<const ForwardRecord> steps,
              std::span<const HeadGrad> seeds, R2N2Params& grads) {
  if (steps.size() != seeds.size()) throw InvariantViolation("one gradient seed per step required");
  check_shape(grads.dense1.W, p.dense1.W.rows(), p.dense1.W.cols(), "gradient set");
  check_shape(grads.actor.W, p.actor.W.rows(), p.actor.W.cols(), "gradient set");
  const int H = p.hidden;
  const int T = p.shape.max_tasks;
  const int n = p.shape.hosts;

  // Gradient reaching each layer's hidden state from the following step.
  std::array<Eigen::VectorXd, kGruLayers> carry;
  for (auto& c : carry) c = Eigen::VectorXd::Zero(H);

  for (std::size_t t = steps.size(); t-- > 0;) {
    const ForwardRecord& rec = steps[t];
    const HeadGrad& seed = seeds[t];
    check_shape(seed.dlogits, T, n, "logit gradient");
    if (rec.x.size() != p.dense1.W.cols()) throw InvariantViolation("shape mismatch in forward record");

    Eigen::VectorXd dlog(T * n);
    for (int r = 0; r < T; ++r)
      for (int c = 0; c < n; ++c) dlog(r * n + c) = seed.dlogits(r, c);

    grads.actor.W.noalias() += dlog * rec.top.transpose();
    grads.actor.b += dlog;
    grads.critic.W += seed.dvalue * rec.top.transpose();
    grads.critic.b(0, 0) += seed.dvalue;
    Eigen::VectorXd du = p.actor.W.transpose() * dlog + seed.dvalue * p.critic.W.transpose();

    for (int l = kGruLayers - 1; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      const Gru& g = p.gru[li];
      Gru& dg = grads.gru[li];
      const GruStep& st = rec.gru[li];

      const Eigen::VectorXd ds_new = du + carry[li];
      Eigen::VectorXd du_in = du;  // identity skip

      const Eigen::VectorXd dz = ds_new.cwiseProduct(st.c - st.s_prev);
      const Eigen::VectorXd dc = ds_new.cwiseProduct(st.z);
      Eigen::VectorXd ds = ds_new.cwiseProduct((1.0 - st.z.array()).matrix());

      const Eigen::VectorXd rs = st.r.cwiseProduct(st.s_prev);
      const Eigen::VectorXd dac = dc.cwiseProduct((1.0 - st.c.array().square()).matrix());
      dg.Wc.noalias() += dac * st.input.transpose();
      dg.Uc.noalias() += dac * rs.transpose();
      dg.bc += dac;
      du_in.noalias() += g.Wc.transpose() * dac;
      const Eigen::VectorXd drs = g.Uc.transpose() * dac;
      const Eigen::VectorXd dr = drs.cwiseProduct(st.s_prev);
      ds += drs.cwiseProduct(st.r);

      const Eigen::VectorXd daz = dz.cwiseProduct(st.z.cwiseProduct((1.0 - st.z.array()).matrix()));
      dg.Wz.noalias() += daz * st.input.transpose();
      dg.Uz.noalias() += daz * st.s_prev.transpose();
      dg.bz += daz;
      du_in.noalias() += g.Wz.transpose() * daz;
      ds.noalias() += g.Uz.transpose() * daz;

      const Eigen::VectorXd dar = dr.cwiseProduct(st.r.cwiseProduct((1.0 - st.r.array()).matrix()));
      dg.Wr.noalias() += dar * st.input.transpose();
      dg.Ur.noalias() += dar * st.s_prev.transpose();
      dg.br += dar;
      du_in.noalias() += g.Wr.transpose() * dar;
      ds.noalias() += g.Ur.transpose() * dar;

      carry[li] = ds;
      du = du_in;
    }

    const Eigen::VectorXd da2 = du.cwiseProduct((1.0 - rec.h2.array().square()).matrix());
    grads.dense2.W.noalias() += da2 * rec.h1.transpose();
    grads.dense2.b += da2;
    const Eigen::VectorXd dh1 = p.dense2.W.transpose() * da2;
    const Eigen::VectorXd da1 = dh1.cwiseProduct((1.0 - rec.h1.array().square()).matrix());
    grads.dense1.W.noalias() += da1 * rec.x.transpose();
    grads.dense1.b += da1;
  }
}

MlpParams MlpParams::init(const std::vector<int>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  std::mt19937_64 rng(seed);
  MlpParams p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    p.layers.push_back(Dense::uniform(widths[i], widths[i + 1], rng));
  }
  return p;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  for (const auto& l : layers) {
    z.layers.push_back(Dense::zeros(static_cast<int>(l.W.cols()), static_cast<int>(l.W.rows())));
  }
  return z;
}

namespace {

template <class Ref, class P>
std::vector<Ref> mlp_tensors(P& p) {
  std::vector<Ref> t;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string n = "layer" + std::to_string(i + 1);
    t.push_back({n + ".W", &p.layers[i].W});
    t.push_back({n + ".b", &p.layers[i].b});
  }
  return t;
}

}  // namespace

std::vector<TensorRef> MlpParams::tensors() { return mlp_tensors<TensorRef>(*this); }
std::vector<ConstTensorRef> MlpParams::tensors() const { return mlp_tensors<ConstTensorRef>(*this); }

MlpRecord mlp_forward(const MlpParams& p, const Eigen::VectorXd& input) {
  if (input.size() != p.input_size()) throw InvariantViolation("input size does not match network");
  MlpRecord rec;
  rec.activations.push_back(input);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    Eigen::VectorXd a = p.layers[i].W * rec.activations.back() + p.layers[i].b;
    if (i + 1 < p.layers.size()) a = tanh_v(a);
    if (!a.allFinite()) {
      throw NumericalFailure("non-finite activation in layer layer" + std::to_string(i + 1));
    }
    rec.activations.push_back(std::move(a));
  }
  return rec;
}

void mlp_backward(const MlpParams& p, const MlpRecord& record, const Eigen::VectorXd& dout,
                  MlpParams& grads) {
  if (dout.size() != p.output_size()) throw InvariantViolation("output gradient size mismatch");
  if (record.activations.size() != p.layers.size() + 1) throw InvariantViolation("record does not match network");
  Eigen::VectorXd d = dout;
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    if (i + 1 < p.layers.size()) {
      d = d.cwiseProduct((1.0 - record.activations[i + 1].array().square()).matrix());
    }
    grads.layers[i].W.noalias() += d * record.activations[i].transpose();
    grads.layers[i].b += d;
    if (i > 0) d = p.layers[i].W.transpose() * d;
  }
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Eigen::MatrixXd as_rows(const Eigen::VectorXd& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) throw InvariantViolation("cannot reshape vector");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = v(r * cols + c);
  return m;
}

std::vector<HostId> rank_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  std::vector<HostId> ids(static_cast<std::size_t>(row.size()));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](HostId a, HostId b) { return row(a) > row(b); });
  return ids;
}

csm::RankedAction policy_to_ranking(const Eigen::MatrixXd& policy,
                                    const std::vector<TaskId>& row_tasks) {
  if (static_cast<Eigen::Index>(row_tasks.size()) > policy.rows()) {
    throw InvariantViolation("more tasks than policy rows");
  }
  csm::RankedAction a;
  for (std::size_t j = 0; j < row_tasks.size(); ++j) {
    a.rows.push_back({row_tasks[j], rank_row(policy.row(static_cast<Eigen::Index>(j)))});
  }
  return a;
}

}  // namespace edgesched::nn
