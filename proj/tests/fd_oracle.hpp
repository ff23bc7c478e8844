#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pvae/autodiff/ops.hpp"

namespace pvae::testing {

using ad::Tape;
using ad::Tensor;
using ad::Var;

using MultiFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline double rel_err(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8}); }

/// Max relative error between tape gradients and central differences of f
/// over every coordinate of every input.
inline double fd_max_rel_error(const MultiFn& f, const std::vector<Tensor>& inputs, double h = 1e-5) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.variable(t));
    tape.backward(f(tape, vars));
    for (const auto& v : vars) analytic.push_back(tape.gradient(v));
  }
  auto eval = [&](const std::vector<Tensor>& at) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : at) vars.push_back(tape.variable(t));
    return f(tape, vars).item();
  };
  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double orig = probe[k][i];
      probe[k][i] = orig + h;
      const double fp = eval(probe);
      probe[k][i] = orig - h;
      const double fm = eval(probe);
      probe[k][i] = orig;
      worst = std::max(worst, rel_err(analytic[k][i], (fp - fm) / (2.0 * h)));
    }
  }
  return worst;
}

inline Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = u(rng);
  return t;
}

/// Weighted sum of every output coordinate so no entry's gradient is trivial.
inline Var project(Tape& tape, Var y, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  Tensor w = random_matrix(y.rows(), y.cols(), rng);
  return ad::sum(ad::mul(y, tape.constant(w.reshaped(y.shape()))));
}

}  // namespace pvae::testing
