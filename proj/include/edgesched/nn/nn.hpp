#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "edgesched/csm/csm.hpp"
#include "edgesched/featurize/featurize.hpp"

namespace edgesched::nn {

/// Named view of one parameter tensor. Biases are single-column matrices.
struct TensorRef {
  std::string name;
  Eigen::MatrixXd* value;
};
struct ConstTensorRef {
  std::string name;
  const Eigen::MatrixXd* value;
};

/// y = W x + b
struct Dense {
  Eigen::MatrixXd W;
  Eigen::MatrixXd b;

  static Dense zeros(int in, int out);
  static Dense uniform(int in, int out, std::mt19937_64& rng);
};

/// Gated recurrent unit. The layer's output adds its input back (identity skip).
struct Gru {
  Eigen::MatrixXd Wz, Uz, bz;
  Eigen::MatrixXd Wr, Ur, br;
  Eigen::MatrixXd Wc, Uc, bc;

  static Gru zeros(int width);
  static Gru uniform(int width, std::mt19937_64& rng);
};

inline constexpr int kGruLayers = 3;
using Hidden = std::array<Eigen::VectorXd, kGruLayers>;

struct R2N2Params {
  StateShape shape;
  int hidden = 64;
  Dense dense1, dense2;
  std::array<Gru, kGruLayers> gru;
  Dense actor;   // max_tasks * hosts logits, row-major
  Dense critic;  // scalar

  static R2N2Params init(const StateShape& shape, int hidden, std::uint64_t seed);
  static R2N2Params zeros(const StateShape& shape, int hidden);
  R2N2Params zeros_like() const { return zeros(shape, hidden); }

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  Hidden initial_hidden() const;
};

struct GruStep {
  Eigen::VectorXd input, s_prev, z, r, c, s_new;
};

/// Everything one forward step needs kept for the backward pass.
struct ForwardRecord {
  Eigen::VectorXd x, h1, h2;
  std::array<GruStep, kGruLayers> gru;
  Eigen::VectorXd top;  // output of the last recurrent layer
  Eigen::MatrixXd logits;
  Eigen::MatrixXd policy;  // max_tasks x hosts, row-stochastic
  double value = 0.0;
};

/// One step of the network. `hidden` is read and replaced by the new state.
/// Throws NumericalFailure naming the first layer that produced NaN or Inf.
ForwardRecord forward(const R2N2Params& p, const Eigen::VectorXd& input, Hidden& hidden);
ForwardRecord forward(const R2N2Params& p, const StateMatrices& state, Hidden& hidden);

/// Gradient of a scalar objective with respect to one step's outputs.
struct HeadGrad {
  Eigen::MatrixXd dlogits;  // max_tasks x hosts
  double dvalue = 0.0;
};

/// Backpropagation through time over consecutive steps that started from a
/// zero hidden state. Gradients are added into `grads`.
void backward(const R2N2Params& p, std::span<const ForwardRecord> steps,
              std::span<const HeadGrad> seeds, R2N2Params& grads);

/// Plain tanh multilayer perceptron with a linear output layer.
struct MlpParams {
  std::vector<Dense> layers;

  static MlpParams init(const std::vector<int>& widths, std::uint64_t seed);
  MlpParams zeros_like() const;
  int input_size() const { return static_cast<int>(layers.front().W.cols()); }
  int output_size() const { return static_cast<int>(layers.back().W.rows()); }

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

struct MlpRecord {
  std::vector<Eigen::VectorXd> activations;  // input, hidden..., output
};

MlpRecord mlp_forward(const MlpParams& p, const Eigen::VectorXd& input);
void mlp_backward(const MlpParams& p, const MlpRecord& record, const Eigen::VectorXd& dout,
                  MlpParams& grads);

// Generic operations over any parameter set exposing tensors().
template <class P>
void axpy(P& dst, double scale, const P& src) {
  auto d = dst.tensors();
  const auto s = src.tensors();
  for (std::size_t i = 0; i < d.size(); ++i) *d[i].value += scale * *s[i].value;
}

template <class P>
void set_zero(P& p) {
  for (auto& t : p.tensors()) t.value->setZero();
}

template <class P>
double squared_norm(const P& p) {
  double s = 0.0;
  for (const auto& t : p.tensors()) s += t.value->squaredNorm();
  return s;
}

template <class P>
bool all_finite(const P& p) {
  for (const auto& t : p.tensors())
    if (!t.value->allFinite()) return false;
  return true;
}

template <class P>
std::size_t parameter_count(const P& p) {
  std::size_t n = 0;
  for (const auto& t : p.tensors()) n += static_cast<std::size_t>(t.value->size());
  return n;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Logits vector reshaped row-major into rows x cols.
Eigen::MatrixXd as_rows(const Eigen::VectorXd& v, int rows, int cols);

/// Host ids by decreasing probability for the first row_tasks.size() rows;
/// ties go to the lower host id.
csm::RankedAction policy_to_ranking(const Eigen::MatrixXd& policy,
                                    const std::vector<TaskId>& row_tasks);
std::vector<HostId> rank_row(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Checkpoints: text, versioned, exact round trip.
void save_params(std::ostream& out, const R2N2Params& p);
R2N2Params load_r2n2(std::istream& in);
void save_params(std::ostream& out, const MlpParams& p);
MlpParams load_mlp(std::istream& in);
void save_params(const std::filesystem::path& path, const R2N2Params& p);
void save_params(const std::filesystem::path& path, const MlpParams& p);
R2N2Params load_r2n2(const std::filesystem::path& path);
MlpParams load_mlp(const std::filesystem::path& path);

}  // namespace edgesched::nn
