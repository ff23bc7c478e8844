#include "pvae/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "pvae/errors.hpp"

namespace pvae::ad {
namespace {

double evaluate(const std::function<Var(Tape&)>& f) {
  Tape tape;
  const double v = f(tape).item();
  if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
  return v;
}

void record(GradCheckResult& r, const std::string& name, std::size_t i, double a, double n, double floor = 1e-8) {
  const double e = relative_error(a, n, floor);
  ++r.coordinates;
  if (e > r.max_rel_error || r.coordinates == 1) {
    r.max_rel_error = std::max(r.max_rel_error, e);
    r.worst_parameter = name;
    r.worst_index = i;
    r.analytic = a;
    r.numeric = n;
  }
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point, double h) {
  if (!(h > 0.0)) throw ContractError("grad_check: step must be positive");
  Tensor analytic;
  {
    Tape tape;
    Var x = tape.variable(point);
    Var y = f(tape, x);
    if (!std::isfinite(y.item())) throw NumericError("grad_check: function value is not finite");
    tape.backward(y);
    analytic = tape.gradient(x);
  }
  GradCheckResult r;
  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = evaluate([&](Tape& t) { return f(t, t.variable(probe)); });
    probe[i] = orig - h;
    const double fm = evaluate([&](Tape& t) { return f(t, t.variable(probe)); });
    probe[i] = orig;
    record(r, "x", i, analytic[i], (fp - fm) / (2.0 * h));
  }
  return r;
}

GradCheckResult grad_check(const std::function<Var(Tape&)>& f, std::span<Parameter* const> params, double h,
                           Stencil stencil, double floor) {
  if (!(h > 0.0)) throw ContractError("grad_check: step must be positive");
  GradientMap analytic;
  {
    Tape tape;
    Var y = f(tape);
    if (!std::isfinite(y.item())) throw NumericError("grad_check: function value is not finite");
    analytic = tape.backward(y);
  }
  GradCheckResult r;
  for (Parameter* p : params) {
    auto it = analytic.find(p);
    const Tensor zeros = Tensor::zeros_like(p->value);
    const Tensor& a = it == analytic.end() ? zeros : it->second;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      auto at = [&](double offset) {
        p->value[i] = orig + offset;
        return evaluate(f);
      };
      double numeric = 0.0;
      if (stencil == Stencil::Central) {
        numeric = (at(h) - at(-h)) / (2.0 * h);
      } else {
        numeric = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
      }
      p->value[i] = orig;
      record(r, p->name, i, a[i], numeric, floor);
    }
  }
  return r;
}

}  // namespace pvae::ad
