#include "orbitpose/mlp.hpp"

#include <cmath>
#include <string>

#include "orbitpose/errors.hpp"

namespace orbitpose {

Mlp::Mlp(std::vector<int> widths, Activation hidden, Activation output, std::mt19937_64& rng)
    : widths_(std::move(widths)), hidden_(hidden), output_(output) {
  if (widths_.size() < 2) throw InvalidArgument("an MLP needs at least input and output widths");
  for (int w : widths_) {
    if (w < 1) throw InvalidArgument("MLP layer widths must be positive, got " + std::to_string(w));
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const bool last = l + 2 == widths_.size();
    const Activation act = last ? output_ : hidden_;
    const double bound = act == Activation::relu ? std::sqrt(6.0 / in) : std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    ad::Tensor w(in, out);
    for (double& x : w.data()) x = dist(rng);
    weights_.push_back(ad::parameter(std::move(w)));
    biases_.push_back(ad::parameter(ad::Tensor(1, out)));
  }
}

ad::Var activate(const ad::Var& x, Activation a) {
  switch (a) {
    case Activation::identity:
      return x;
    case Activation::relu:
      return ad::relu(x);
    case Activation::sigmoid:
      return ad::sigmoid(x);
    case Activation::tanh:
      return ad::tanh(x);
  }
  throw InvalidArgument("unknown activation");
}

ad::Var Mlp::forward(const ad::Var& x) const {
  if (weights_.empty()) throw InvalidArgument("forward on an empty MLP");
  if (x->value.cols() != input_width()) {
    throw ShapeError("mlp: input has " + std::to_string(x->value.cols()) + " columns, expected " +
                     std::to_string(input_width()));
  }
  ad::Var h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ad::add(ad::matmul(h, weights_[l]), biases_[l]);
    h = activate(h, l + 1 == weights_.size() ? output_ : hidden_);
  }
  return h;
}

std::vector<ad::Var> Mlp::parameters() const {
  std::vector<ad::Var> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p->value.size();
  return n;
}

Mlp Mlp::clone() const {
  Mlp m;
  m.widths_ = widths_;
  m.hidden_ = hidden_;
  m.output_ = output_;
  for (const auto& w : weights_) m.weights_.push_back(ad::parameter(w->value));
  for (const auto& b : biases_) m.biases_.push_back(ad::parameter(b->value));
  return m;
}

}  // namespace orbitpose
