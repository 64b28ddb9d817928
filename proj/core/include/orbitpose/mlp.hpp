#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "orbitpose/autodiff.hpp"

namespace orbitpose {

enum class Activation { identity, relu, sigmoid, tanh };

/// Fully connected network. Layer l maps widths[l] -> widths[l + 1]; hidden
/// layers use `hidden`, the last layer uses `output`. Inputs are row-batched:
/// forward takes (batch x widths.front()) and returns (batch x widths.back()).
class Mlp {
 public:
  Mlp() = default;
  /// He-uniform weights for rectifier layers, Glorot-uniform otherwise; zero biases.
  Mlp(std::vector<int> widths, Activation hidden, Activation output, std::mt19937_64& rng);

  ad::Var forward(const ad::Var& x) const;

  const std::vector<int>& widths() const { return widths_; }
  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

  /// Weights and biases interleaved: W0, b0, W1, b1, ...
  std::vector<ad::Var> parameters() const;
  std::size_t parameter_count() const;

  /// Deep copy; the clone shares no nodes with this network.
  Mlp clone() const;

 private:
  std::vector<int> widths_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  std::vector<ad::Var> weights_;
  std::vector<ad::Var> biases_;
};

ad::Var activate(const ad::Var& x, Activation a);

}  // namespace orbitpose
