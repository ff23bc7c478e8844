#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pvae/autodiff/tape.hpp"

namespace pvae::ad {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates per parameter. Moments are sized on the first
/// update; afterwards every update must present the same parameter shapes.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected ADAM update. Grads are validated before anything is
/// touched: a NaN/Inf gradient throws NumericError and leaves params and state
/// exactly as they were.
void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state, double lr);

/// Scales grads in place so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

}  // namespace pvae::ad
