#include "ced/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

namespace ced {

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw InputError("unknown activation '" + std::string(s) + "' (expected relu|tanh)");
}

void MlpSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) throw InputError("MlpSpec: dimensions must be >= 1");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw InputError("MlpSpec: hidden dimensions must be >= 1");
  }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(spec_.seed);
  std::vector<std::size_t> dims{spec_.input_dim};
  dims.insert(dims.end(), spec_.hidden_dims.begin(), spec_.hidden_dims.end());
  dims.push_back(spec_.output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{ad::Tensor(fan_in, fan_out), ad::Tensor(1, fan_out)};
    for (double& w : layer.weight.values) w = dist(rng);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(MlpSpec spec, std::vector<DenseLayer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
  spec_.validate();
  std::size_t fan_in = spec_.input_dim;
  const std::size_t expected = spec_.hidden_dims.size() + 1;
  if (layers_.size() != expected) throw InputError("Mlp: layer count does not match spec");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::size_t fan_out =
        l < spec_.hidden_dims.size() ? spec_.hidden_dims[l] : spec_.output_dim;
    const auto& L = layers_[l];
    if (L.weight.rows() != fan_in || L.weight.cols() != fan_out || L.bias.rows() != 1 ||
        L.bias.cols() != fan_out) {
      throw InputError("Mlp: layer " + std::to_string(l) + " has the wrong shape");
    }
    fan_in = fan_out;
  }
}

ad::Var Mlp::forward(ad::Tape& tape, ad::Var inputs) {
  if (inputs.cols() != spec_.input_dim) {
    throw InputError("Mlp::forward: expected " + std::to_string(spec_.input_dim) +
                     " input columns, got " + std::to_string(inputs.cols()));
  }
  ad::Var h = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = ad::add_row(ad::matmul(h, tape.parameter(layers_[l].weight)),
                    tape.parameter(layers_[l].bias));
    if (l + 1 < layers_.size()) {
      h = spec_.activation == Activation::relu ? ad::relu(h) : ad::tanh(h);
    }
  }
  return h;
}

Matrix Mlp::forward(const Matrix& inputs) const {
  ad::Tape tape;
  ad::Var h = tape.constant(inputs);
  if (h.cols() != spec_.input_dim) {
    throw InputError("Mlp::forward: expected " + std::to_string(spec_.input_dim) +
                     " input columns, got " + std::to_string(h.cols()));
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = ad::add_row(ad::matmul(h, tape.constant(layers_[l].weight)),
                    tape.constant(layers_[l].bias));
    if (l + 1 < layers_.size()) {
      h = spec_.activation == Activation::relu ? ad::relu(h) : ad::tanh(h);
    }
  }
  return h.value().to_matrix();
}

std::vector<ad::Tensor*> Mlp::parameters() {
  std::vector<ad::Tensor*> out;
  for (auto& L : layers_) {
    out.push_back(&L.weight);
    out.push_back(&L.bias);
  }
  return out;
}

void Mlp::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

}  // namespace ced
