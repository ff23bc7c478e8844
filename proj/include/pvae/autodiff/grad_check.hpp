#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "pvae/autodiff/tape.hpp"

namespace pvae::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at the worst coordinate
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Relative error with a max(|a|, |n|, floor) denominator.
double relative_error(double analytic, double numeric, double floor = 1e-8);

/// Central-difference check of a scalar function of one tensor.
/// `f` must rebuild its graph from the supplied leaf on every call.
GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point, double h = 1e-5);

enum class Stencil {
  Central,   // (f(x+h) - f(x-h)) / 2h, truncation O(h^2)
  FivePoint  // (f(x-2h) - 8f(x-h) + 8f(x+h) - f(x+2h)) / 12h, truncation O(h^4)
};

/// Same check over every coordinate of a set of parameters. Parameters are
/// perturbed in place and restored before returning.
/// A larger `floor` suits objectives with large |f|, where difference
/// round-off (about eps |f| / h) swamps derivatives below the floor.
GradCheckResult grad_check(const std::function<Var(Tape&)>& f, std::span<Parameter* const> params, double h = 1e-5,
                           Stencil stencil = Stencil::Central, double floor = 1e-8);

}  // namespace pvae::ad
