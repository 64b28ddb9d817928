#include "orbitpose/optim.hpp"

#include <cmath>
#include <string>

#include "orbitpose/errors.hpp"

namespace orbitpose {

AdamState AdamState::zeros_like(const std::vector<ad::Tensor>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.rows(), p.cols());
    s.v.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(std::vector<ad::Tensor*>& params, const std::vector<const ad::Tensor*>& grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(state.m[i]) ||
        !params[i]->same_shape(state.v[i])) {
      throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i));
    }
  }
  const long t = state.step + 1;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i]->all_finite()) {
      throw TrainingDivergence(t, "non-finite gradient for parameter " + std::to_string(i));
    }
  }
  state.step = t;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i]->data();
    const auto& g = grads[i]->data();
    auto& m = state.m[i].data();
    auto& v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

Adam::Adam(std::vector<ad::Var> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  std::vector<ad::Tensor> values;
  for (const auto& p : params_) values.push_back(p->value);
  state_ = AdamState::zeros_like(values);
}

void Adam::step() {
  std::vector<ad::Tensor*> ps;
  std::vector<const ad::Tensor*> gs;
  std::vector<ad::Tensor> zero_grads;
  zero_grads.reserve(params_.size());
  for (auto& p : params_) {
    ps.push_back(&p->value);
    if (p->grad.same_shape(p->value)) {
      gs.push_back(&p->grad);
    } else {
      // Parameter not reached by the last backward pass.
      zero_grads.emplace_back(p->value.rows(), p->value.cols());
      gs.push_back(&zero_grads.back());
    }
  }
  adam_step(ps, gs, state_, config_);
}

}  // namespace orbitpose
