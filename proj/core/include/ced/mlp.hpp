#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ced/autodiff.hpp"
#include "ced/types.hpp"

namespace ced {

enum class Activation { relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct MlpSpec {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_dims{64, 64};
  std::size_t output_dim = 2;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct DenseLayer {
  ad::Tensor weight;  // fan_in x fan_out
  ad::Tensor bias;    // 1 x fan_out
};

/// Fully connected network; the activation follows every layer but the last.
class Mlp {
 public:
  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)) from spec.seed, zero biases.
  explicit Mlp(MlpSpec spec);
  Mlp(MlpSpec spec, std::vector<DenseLayer> layers);

  const MlpSpec& spec() const { return spec_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Records the forward pass on `tape`; parameters become gradient leaves.
  ad::Var forward(ad::Tape& tape, ad::Var inputs);

  /// Inference: batch x input_dim -> batch x output_dim.
  Matrix forward(const Matrix& inputs) const;

  std::vector<ad::Tensor*> parameters();
  void zero_grad();

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
};

}  // namespace ced
