#include "pvae/autodiff/adam.hpp"

#include <cmath>
#include <string>

#include "pvae/errors.hpp"

namespace pvae::ad {

void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw ContractError("adam_step: learning rate must be positive");
  if (params.size() != grads.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  const bool fresh = state.first_moment.empty();
  if (!fresh && state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                         " parameters, update has " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!grads[k].same_shape(params[k]->value)) {
      throw DimensionError("adam_step: gradient " + shape_string(grads[k].shape()) + " for parameter '" +
                           params[k]->name + "' " + shape_string(params[k]->value.shape()));
    }
    if (!fresh && !state.first_moment[k].same_shape(params[k]->value)) {
      throw DimensionError("adam_step: moment shape changed for parameter '" + params[k]->name + "'");
    }
    if (!grads[k].all_finite()) {
      throw NumericError("adam_step: non-finite gradient for parameter '" + params[k]->name + "'");
    }
  }
  if (fresh) {
    for (Parameter* p : params) {
      state.first_moment.push_back(Tensor::zeros_like(p->value));
      state.second_moment.push_back(Tensor::zeros_like(p->value));
    }
  }

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& m = state.first_moment[k];
    Tensor& v = state.second_moment[k];
    Tensor& w = params[k]->value;
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

double clip_global_norm(std::span<Tensor> grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads)
    for (double v : g.values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double k = max_norm / norm;
    for (Tensor& g : grads)
      for (double& v : g.values()) v *= k;
  }
  return norm;
}

}  // namespace pvae::ad
