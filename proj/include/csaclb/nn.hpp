#pragma once

/// @file nn.hpp
/// @brief Minimal dense feed-forward network with reverse-mode gradients,
/// Adam and polyak averaging.
///
/// Batches are stored column-major with one sample per column: an input batch
/// is a (features x batch) matrix. All parameters of a network live in one
/// contiguous vector so optimizers and target averaging operate on flat
/// storage; per-layer weights and biases are views into it.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace csaclb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Per-layer activations recorded by a forward pass, consumed by backward().
struct ForwardTape {
  /// activations[0] is the input; activations[l + 1] is the output of layer l
  /// (post-rectifier for hidden layers, affine for the last).
  std::vector<Matrix> activations;

  const Matrix& output() const { return activations.back(); }
};

struct NetGradients {
  Vector params;  ///< same layout as DenseNet::params(); empty if not requested
  Matrix input;   ///< d(loss)/d(input), (input width x batch)
};

/// Rectifier trunk with a linear output layer.
class DenseNet {
 public:
  DenseNet() = default;

  /// Zero-initialized network. layer_sizes = {in, hidden..., out}.
  explicit DenseNet(std::vector<int> layer_sizes);

  /// Weights and biases uniform in +-1/sqrt(fan_in).
  static DenseNet uniform_init(std::vector<int> layer_sizes, std::mt19937_64& rng);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  Eigen::Index num_params() const { return params_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Eigen::Map<Matrix> weight(int layer);
  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<Vector> bias(int layer);
  Eigen::Map<const Vector> bias(int layer) const;

  /// Single-sample evaluation.
  Vector forward(const Vector& input) const;
  /// Batched evaluation without recording a tape.
  Matrix forward(const Matrix& inputs) const;
  /// Batched evaluation that keeps the activations for backward().
  ForwardTape forward_tape(const Matrix& inputs) const;

  /// Reverse pass. `upstream` is d(loss)/d(output), (output width x batch),
  /// already carrying any batch averaging. Parameter gradients are skipped when
  /// want_params is false (input gradients only).
  NetGradients backward(const ForwardTape& tape, const Matrix& upstream,
                        bool want_params = true) const;

  friend bool operator==(const DenseNet& a, const DenseNet& b) {
    return a.layer_sizes_ == b.layer_sizes_ && a.params_ == b.params_;
  }

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::Index> weight_offset_;
  std::vector<Eigen::Index> bias_offset_;
  Vector params_;
};

struct ValueAndGrad {
  Matrix outputs;
  Vector param_grads;
  Matrix input_grads;
};

/// Forward plus backward in one call; see DenseNet::backward for `upstream`.
ValueAndGrad net_value_and_grad(const DenseNet& net, const Matrix& inputs, const Matrix& upstream);

/// Bias-corrected Adam over a flat parameter vector.
struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Vector first_moment;
  Vector second_moment;
  std::int64_t step_count = 0;

  AdamState() = default;
  explicit AdamState(Eigen::Index n)
      : first_moment(Vector::Zero(n)), second_moment(Vector::Zero(n)) {}
};

void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Vector& grads, double lr);

/// target <- tau * online + (1 - tau) * target.
void polyak_update(Eigen::Ref<Vector> target, const Vector& online, double tau);
void polyak_update(DenseNet& target, const DenseNet& online, double tau);

/// {layer_sizes, weights (row-major nested arrays), biases}. Doubles are
/// emitted in shortest round-trip form so parsing restores them exactly.
nlohmann::json to_json(const DenseNet& net);
DenseNet dense_net_from_json(const nlohmann::json& doc);

}  // namespace csaclb
