#pragma once

#include <vector>

#include "orbitpose/autodiff.hpp"

namespace orbitpose {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments per parameter tensor, plus the number of steps
/// taken so far.
struct AdamState {
  std::vector<ad::Tensor> m;
  std::vector<ad::Tensor> v;
  long step = 0;

  static AdamState zeros_like(const std::vector<ad::Tensor>& params);
};

/// One Adam update with bias correction, in place. Throws TrainingDivergence
/// carrying the (1-based) step index if any gradient entry is not finite; in
/// that case neither params nor state are modified.
void adam_step(std::vector<ad::Tensor*>& params, const std::vector<const ad::Tensor*>& grads, AdamState& state,
               const AdamConfig& config);

/// Adam over autodiff parameter nodes, reading their `grad` fields.
class Adam {
 public:
  Adam(std::vector<ad::Var> params, AdamConfig config = {});

  void step();
  long steps() const { return state_.step; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<ad::Var> params_;
  AdamConfig config_;
  AdamState state_;
};

}  // namespace orbitpose
