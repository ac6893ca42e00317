#include "csaclb/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csaclb {

namespace {

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

DenseNet::DenseNet(std::vector<int> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) {
    throw std::invalid_argument("DenseNet needs at least an input and an output size");
  }
  Eigen::Index offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    const int fan_in = layer_sizes_[l];
    const int fan_out = layer_sizes_[l + 1];
    if (fan_in <= 0 || fan_out <= 0) {
      throw std::invalid_argument("DenseNet layer sizes must be positive");
    }
    weight_offset_.push_back(offset);
    offset += static_cast<Eigen::Index>(fan_in) * fan_out;
    bias_offset_.push_back(offset);
    offset += fan_out;
  }
  params_ = Vector::Zero(offset);
}

DenseNet DenseNet::uniform_init(std::vector<int> layer_sizes, std::mt19937_64& rng) {
  DenseNet net(std::move(layer_sizes));
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = net.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = dist(rng);
      }
    }
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      b(i) = dist(rng);
    }
  }
  return net;
}

Eigen::Map<Matrix> DenseNet::weight(int layer) {
  return {params_.data() + weight_offset_[layer], layer_sizes_[layer + 1], layer_sizes_[layer]};
}

Eigen::Map<const Matrix> DenseNet::weight(int layer) const {
  return {params_.data() + weight_offset_[layer], layer_sizes_[layer + 1], layer_sizes_[layer]};
}

Eigen::Map<Vector> DenseNet::bias(int layer) {
  return {params_.data() + bias_offset_[layer], layer_sizes_[layer + 1]};
}

Eigen::Map<const Vector> DenseNet::bias(int layer) const {
  return {params_.data() + bias_offset_[layer], layer_sizes_[layer + 1]};
}

Vector DenseNet::forward(const Vector& input) const {
  if (input.size() != input_size()) {
    throw std::invalid_argument("DenseNet::forward: input has " + std::to_string(input.size()) +
                                " entries, expected " + std::to_string(input_size()));
  }
  Vector h = input;
  for (int l = 0; l < num_layers(); ++l) {
    Vector z = weight(l) * h + bias(l);
    if (l + 1 < num_layers()) {
      z = z.cwiseMax(0.0);
    }
    h = std::move(z);
  }
  return h;
}

Matrix DenseNet::forward(const Matrix& inputs) const {
  if (inputs.rows() != input_size()) {
    throw std::invalid_argument("DenseNet::forward: batch is " +
                                shape_str(inputs.rows(), inputs.cols()) + ", expected " +
                                std::to_string(input_size()) + " rows");
  }
  Matrix h = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * h;
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) {
      z = z.cwiseMax(0.0);
    }
    h = std::move(z);
  }
  return h;
}

ForwardTape DenseNet::forward_tape(const Matrix& inputs) const {
  if (inputs.rows() != input_size()) {
    throw std::invalid_argument("DenseNet::forward_tape: batch is " +
                                shape_str(inputs.rows(), inputs.cols()) + ", expected " +
                                std::to_string(input_size()) + " rows");
  }
  ForwardTape tape;
  tape.activations.reserve(layer_sizes_.size());
  tape.activations.push_back(inputs);
  for (int l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * tape.activations.back();
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) {
      z = z.cwiseMax(0.0);
    }
    tape.activations.push_back(std::move(z));
  }
  return tape;
}

NetGradients DenseNet::backward(const ForwardTape& tape, const Matrix& upstream,
                                bool want_params) const {
  const Matrix& out = tape.output();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw std::invalid_argument("DenseNet::backward: upstream is " +
                                shape_str(upstream.rows(), upstream.cols()) + ", output is " +
                                shape_str(out.rows(), out.cols()));
  }
  NetGradients grads;
  if (want_params) {
    grads.params = Vector::Zero(params_.size());
  }
  Matrix delta = upstream;  // d(loss)/d(pre-activation) of the current layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Matrix& below = tape.activations[l];
    if (want_params) {
      Eigen::Map<Matrix> dw(grads.params.data() + weight_offset_[l], layer_sizes_[l + 1],
                            layer_sizes_[l]);
      dw.noalias() = delta * below.transpose();
      Eigen::Map<Vector> db(grads.params.data() + bias_offset_[l], layer_sizes_[l + 1]);
      db = delta.rowwise().sum();
    }
    Matrix d_below = weight(l).transpose() * delta;
    if (l > 0) {
      // Rectifier mask: the recorded activation is positive iff the
      // pre-activation was.
      d_below = (below.array() > 0.0).select(d_below, 0.0);
    }
    delta = std::move(d_below);
  }
  grads.input = std::move(delta);
  return grads;
}

ValueAndGrad net_value_and_grad(const DenseNet& net, const Matrix& inputs, const Matrix& upstream) {
  ForwardTape tape = net.forward_tape(inputs);
  NetGradients g = net.backward(tape, upstream, true);
  return {std::move(tape.activations.back()), std::move(g.params), std::move(g.input)};
}

void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Vector& grads, double lr) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: " + std::to_string(params.size()) +
                                " parameters but " + std::to_string(grads.size()) + " gradients");
  }
  if (state.first_moment.size() == 0 && state.step_count == 0) {
    state = AdamState(params.size());
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state does not match parameter count");
  }
  if (!(lr > 0.0)) {
    throw std::invalid_argument("adam_step: learning rate must be positive");
  }
  constexpr double b1 = AdamState::kBeta1;
  constexpr double b2 = AdamState::kBeta2;
  state.step_count += 1;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * grads;
  state.second_moment = b2 * state.second_moment + (1.0 - b2) * grads.cwiseProduct(grads);
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + AdamState::kEpsilon);
}

void polyak_update(Eigen::Ref<Vector> target, const Vector& online, double tau) {
  if (target.size() != online.size()) {
    throw std::invalid_argument("polyak_update: shape mismatch");
  }
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("polyak_update: tau must lie in [0, 1]");
  }
  target = tau * online + (1.0 - tau) * target;
}

void polyak_update(DenseNet& target, const DenseNet& online, double tau) {
  if (target.layer_sizes() != online.layer_sizes()) {
    throw std::invalid_argument("polyak_update: network shapes differ");
  }
  polyak_update(target.params(), online.params(), tau);
}

nlohmann::json to_json(const DenseNet& net) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weight(l);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        row.push_back(w(i, j));
      }
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    const auto b = net.bias(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  return {{"layer_sizes", net.layer_sizes()}, {"weights", weights}, {"biases", biases}};
}

DenseNet dense_net_from_json(const nlohmann::json& doc) {
  DenseNet net(doc.at("layer_sizes").get<std::vector<int>>());
  const auto& weights = doc.at("weights");
  const auto& biases = doc.at("biases");
  if (weights.size() != static_cast<size_t>(net.num_layers()) ||
      biases.size() != static_cast<size_t>(net.num_layers())) {
    throw std::invalid_argument("network json: layer count does not match layer_sizes");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    auto w = net.weight(l);
    const auto& rows = weights[l];
    if (rows.size() != static_cast<size_t>(w.rows())) {
      throw std::invalid_argument("network json: layer " + std::to_string(l) +
                                  " has wrong number of weight rows");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (rows[i].size() != static_cast<size_t>(w.cols())) {
        throw std::invalid_argument("network json: ragged weight row in layer " +
                                    std::to_string(l));
      }
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = rows[i][j].get<double>();
      }
    }
    auto b = net.bias(l);
    if (biases[l].size() != static_cast<size_t>(b.size())) {
      throw std::invalid_argument("network json: bias length mismatch in layer " +
                                  std::to_string(l));
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      b(i) = biases[l][i].get<double>();
    }
  }
  return net;
}

}  // namespace csaclb
