#include "pvae/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "pvae/errors.hpp"

namespace pvae::ad {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

MapC as_matrix(const Tensor& t) { return MapC(t.data(), t.rows(), t.cols()); }
Map as_matrix(Tensor& t) { return Map(t.data(), t.rows(), t.cols()); }

void require_same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw ContractError("operands live on different tapes");
}

void require_same_shape(const char* op, Var a, Var b) {
  require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

template <class F, class DF>
Var unary(OpKind kind, Var a, F f, DF df) {
  const Tensor& x = a.value();
  Tensor y = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id();
  return a.tape()->push(kind, {ia}, std::move(y), [ia, df](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(ia);
    const Tensor& yv = t.value(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows() || bv.rank() < 2) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(av.shape()) + " . " +
                         shape_string(bv.shape()));
  }
  Tensor c = Tensor::matrix(av.rows(), bv.cols());
  as_matrix(c).noalias() = as_matrix(av) * as_matrix(bv);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(OpKind::MatMul, {ia, ib}, std::move(c), [ia, ib](Tape& t, std::size_t self) {
    const auto g = as_matrix(t.grad(self));
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      as_matrix(ga).noalias() += g * as_matrix(t.value(ib)).transpose();
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      as_matrix(gb).noalias() += as_matrix(t.value(ia)).transpose() * g;
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor y = a.value();
  y += b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(OpKind::Add, {ia, ib}, std::move(y), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad_buffer(ia) += g;
    if (t.requires_grad(ib)) t.grad_buffer(ib) += g;
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor y = Tensor::zeros_like(av);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(OpKind::Sub, {ia, ib}, std::move(y), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad_buffer(ia) += g;
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor y = Tensor::zeros_like(av);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(OpKind::Mul, {ia, ib}, std::move(y), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) {
      const Tensor& bv = t.value(ib);
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      const Tensor& av = t.value(ia);
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var div(Var a, Var b) {
  require_same_shape("div", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor y = Tensor::zeros_like(av);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (bv[i] == 0.0) throw DomainError("div: division by zero at element " + std::to_string(i));
    y[i] = av[i] / bv[i];
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(OpKind::Div, {ia, ib}, std::move(y), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (t.requires_grad(ib)) {
      const Tensor& yv = t.value(self);
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * yv[i] / bv[i];
    }
  });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row);
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.size() != av.cols()) {
    throw DimensionError("add_row: row " + shape_string(rv.shape()) + " does not fit " +
                         shape_string(av.shape()));
  }
  Tensor y = av;
  const std::size_t m = av.rows(), n = av.cols();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) y[r * n + c] += rv[c];
  const std::size_t ia = a.id(), ib = row.id();
  return a.tape()->push(OpKind::AddRow, {ia, ib}, std::move(y), [ia, ib, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad_buffer(ia) += g;
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
    }
  });
}

Var scale(Var a, double k) {
  return unary(OpKind::Scale, a, [k](double x) { return k * x; }, [k](double, double) { return k; });
}

Var add_scalar(Var a, double k) {
  return unary(OpKind::AddScalar, a, [k](double x) { return x + k; }, [](double, double) { return 1.0; });
}

Var sigmoid(Var a) {
  return unary(
      OpKind::Sigmoid, a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(OpKind::Tanh, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary(OpKind::Exp, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError("log: non-positive input " + std::to_string(x[i]) + " at element " + std::to_string(i));
    }
  }
  return unary(OpKind::Log, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw DomainError("sqrt: negative input at element " + std::to_string(i));
  }
  return unary(
      OpKind::Sqrt, a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var square(Var a) {
  return unary(OpKind::Square, a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var relu(Var a) {
  return unary(
      OpKind::Relu, a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat: no operands");
  Tape* tape = parts[0].tape();
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    if (p.tape() != tape) throw ContractError("concat: operands live on different tapes");
    if (p.rows() != m) {
      throw DimensionError("concat: row count mismatch " + shape_string(parts[0].shape()) + " vs " +
                           shape_string(p.shape()));
    }
    ids.push_back(p.id());
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor y = Tensor::matrix(m, total);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    const std::size_t w = v.cols();
    for (std::size_t r = 0; r < m; ++r) std::copy_n(v.data() + r * w, w, y.data() + r * total + off);
    off += w;
  }
  return tape->push(OpKind::Concat, ids, std::move(y), [ids, widths, m, total](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t w = widths[k];
      if (t.requires_grad(ids[k])) {
        Tensor& gk = t.grad_buffer(ids[k]);
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < w; ++c) gk[r * w + c] += g[r * total + off + c];
      }
      off += w;
    }
  });
}

Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(parts);
}

Var slice(Var a, std::size_t begin, std::size_t width) {
  const Tensor& av = a.value();
  const std::size_t m = av.rows(), n = av.cols();
  if (begin + width > n) {
    throw DimensionError("slice: columns [" + std::to_string(begin) + ", " + std::to_string(begin + width) +
                         ") out of range for " + shape_string(av.shape()));
  }
  Tensor y = Tensor::matrix(m, width);
  for (std::size_t r = 0; r < m; ++r) std::copy_n(av.data() + r * n + begin, width, y.data() + r * width);
  const std::size_t ia = a.id();
  return a.tape()->push(OpKind::Slice, {ia}, std::move(y), [ia, m, n, begin, width](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < width; ++c) ga[r * n + begin + c] += g[r * width + c];
  });
}

Var gather_rows(Var a, std::vector<std::size_t> rows) {
  const Tensor& av = a.value();
  const std::size_t n = av.cols();
  Tensor y = Tensor::matrix(rows.size(), n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= av.rows()) {
      throw IndexError("gather_rows: row " + std::to_string(rows[k]) + " out of range for " +
                       shape_string(av.shape()));
    }
    std::copy_n(av.data() + rows[k] * n, n, y.data() + k * n);
  }
  const std::size_t ia = a.id();
  return a.tape()->push(OpKind::GatherRows, {ia}, std::move(y),
                        [ia, n, rows = std::move(rows)](Tape& t, std::size_t self) {
                          if (!t.requires_grad(ia)) return;
                          const Tensor& g = t.grad(self);
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t k = 0; k < rows.size(); ++k)
                            for (std::size_t c = 0; c < n; ++c) ga[rows[k] * n + c] += g[k * n + c];
                        });
}

Var reshape(Var a, std::vector<std::size_t> shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id();
  return a.tape()->push(OpKind::Reshape, {ia}, std::move(y), [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  double s = 0.0;
  for (double v : av.values()) s += v;
  const std::size_t ia = a.id();
  return a.tape()->push(OpKind::Sum, {ia}, Tensor::scalar(s), [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0];
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mean(Var a) {
  const Tensor& av = a.value();
  if (av.empty()) throw ContractError("mean of an empty tensor");
  double s = 0.0;
  for (double v : av.values()) s += v;
  const double inv = 1.0 / static_cast<double>(av.size());
  const std::size_t ia = a.id();
  return a.tape()->push(OpKind::Mean, {ia}, Tensor::scalar(s * inv), [ia, inv](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0] * inv;
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

namespace {

Var row_reduce(OpKind kind, Var a, double factor) {
  const Tensor& av = a.value();
  const std::size_t m = av.rows(), n = av.cols();
  Tensor y = Tensor::matrix(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += av[r * n + c];
    y[r] = s * factor;
  }
  const std::size_t ia = a.id();
  return a.tape()->push(kind, {ia}, std::move(y), [ia, m, n, factor](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += g[r] * factor;
  });
}

}  // namespace

Var row_sum(Var a) { return row_reduce(OpKind::RowSum, a, 1.0); }

Var row_mean(Var a) {
  const std::size_t n = a.cols();
  if (n == 0) throw ContractError("row_mean of zero-width tensor");
  return row_reduce(OpKind::RowMean, a, 1.0 / static_cast<double>(n));
}

Var l2norm(Var a) {
  const Tensor& av = a.value();
  const std::size_t m = av.rows(), n = av.cols();
  Tensor y = Tensor::matrix(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += av[r * n + c] * av[r * n + c];
    y[r] = std::sqrt(s);
  }
  const std::size_t ia = a.id();
  return a.tape()->push(OpKind::L2Norm, {ia}, std::move(y), [ia, m, n](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    const Tensor& x = t.value(ia);
    const Tensor& norm = t.value(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t r = 0; r < m; ++r) {
      if (norm[r] == 0.0) continue;  // subgradient 0 at the origin
      const double k = g[r] / norm[r];
      for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += k * x[r * n + c];
    }
  });
}

Var dot(Var a, Var b) {
  require_same_shape("dot", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t m = av.rows(), n = av.cols();
  Tensor y = Tensor::matrix(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += av[r * n + c] * bv[r * n + c];
    y[r] = s;
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(OpKind::Dot, {ia, ib}, std::move(y), [ia, ib, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) {
      const Tensor& bv = t.value(ib);
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += g[r] * bv[r * n + c];
    }
    if (t.requires_grad(ib)) {
      const Tensor& av = t.value(ia);
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gb[r * n + c] += g[r] * av[r * n + c];
    }
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

Var softmax_cross_entropy(Var logits, std::span<const int> targets, std::span<const double> weights) {
  const Tensor& lv = logits.value();
  const std::size_t m = lv.rows(), v = lv.cols();
  if (targets.size() != m || weights.size() != m) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets and " +
                         std::to_string(weights.size()) + " weights for logits " + shape_string(lv.shape()));
  }
  // probs holds softmax per row for the backward pass.
  std::vector<double> probs(m * v);
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const int tgt = targets[r];
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= v) {
      throw IndexError("softmax_cross_entropy: target " + std::to_string(tgt) + " outside vocabulary of " +
                       std::to_string(v));
    }
    const double* row = lv.data() + r * v;
    const double mx = *std::max_element(row, row + v);
    double z = 0.0;
    for (std::size_t c = 0; c < v; ++c) {
      probs[r * v + c] = std::exp(row[c] - mx);
      z += probs[r * v + c];
    }
    for (std::size_t c = 0; c < v; ++c) probs[r * v + c] /= z;
    if (weights[r] != 0.0) loss += weights[r] * (std::log(z) + mx - row[tgt]);
  }
  std::vector<int> tg(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  const std::size_t ia = logits.id();
  return logits.tape()->push(
      OpKind::SoftmaxXent, {ia}, Tensor::scalar(loss),
      [ia, m, v, probs = std::move(probs), tg = std::move(tg), w = std::move(w)](Tape& t, std::size_t self) {
        if (!t.requires_grad(ia)) return;
        const double g = t.grad(self)[0];
        Tensor& ga = t.grad_buffer(ia);
        for (std::size_t r = 0; r < m; ++r) {
          if (w[r] == 0.0) continue;
          const double k = g * w[r];
          for (std::size_t c = 0; c < v; ++c) ga[r * v + c] += k * probs[r * v + c];
          ga[r * v + static_cast<std::size_t>(tg[r])] -= k;
        }
      });
}

Var softmax_cross_entropy(Var logits, int target) {
  if (logits.rows() != 1) {
    throw DimensionError("softmax_cross_entropy: expected a single row, got " + shape_string(logits.shape()));
  }
  const int targets[] = {target};
  const double weights[] = {1.0};
  return softmax_cross_entropy(logits, targets, weights);
}

}  // namespace pvae::ad

namespace pvae::ad {

Var lstm_cell(Var gates, Var state, std::span<const double> mask) {
  require_same_tape(gates, state);
  const Tensor& gv = gates.value();
  const Tensor& sv = state.value();
  const std::size_t b = gv.rows(), h = sv.cols() / 2;
  if (gv.cols() != 4 * h || sv.rows() != b || sv.cols() != 2 * h || mask.size() != b) {
    throw DimensionError("lstm_cell: gates " + shape_string(gv.shape()) + ", state " + shape_string(sv.shape()) +
                         ", mask of " + std::to_string(mask.size()));
  }
  // act holds (i, f, g, o, tanh c) per row for the backward pass.
  std::vector<double> act(b * 5 * h);
  Tensor out = Tensor::matrix(b, 2 * h);
  for (std::size_t r = 0; r < b; ++r) {
    const double* a = gv.data() + r * 4 * h;
    const double* prev = sv.data() + r * 2 * h;
    double* y = out.data() + r * 2 * h;
    double* k = act.data() + r * 5 * h;
    const double m = mask[r];
    for (std::size_t j = 0; j < h; ++j) {
      const double i = 1.0 / (1.0 + std::exp(-a[j]));
      const double f = 1.0 / (1.0 + std::exp(-a[h + j]));
      const double g = std::tanh(a[2 * h + j]);
      const double o = 1.0 / (1.0 + std::exp(-a[3 * h + j]));
      const double c = f * prev[h + j] + i * g;
      const double tc = std::tanh(c);
      k[j] = i;
      k[h + j] = f;
      k[2 * h + j] = g;
      k[3 * h + j] = o;
      k[4 * h + j] = tc;
      y[j] = m * (o * tc) + (1.0 - m) * prev[j];
      y[h + j] = m * c + (1.0 - m) * prev[h + j];
    }
  }
  std::vector<double> mk(mask.begin(), mask.end());
  const std::size_t ig = gates.id(), is = state.id();
  return gates.tape()->push(
      OpKind::LstmCell, {ig, is}, std::move(out),
      [ig, is, b, h, act = std::move(act), mk = std::move(mk)](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& prev = t.value(is);
        Tensor* ga = t.requires_grad(ig) ? &t.grad_buffer(ig) : nullptr;
        Tensor* gs = t.requires_grad(is) ? &t.grad_buffer(is) : nullptr;
        for (std::size_t r = 0; r < b; ++r) {
          const double m = mk[r];
          const double* g = gy.data() + r * 2 * h;
          const double* k = act.data() + r * 5 * h;
          const double* p = prev.data() + r * 2 * h;
          for (std::size_t j = 0; j < h; ++j) {
            const double i = k[j], f = k[h + j], gg = k[2 * h + j], o = k[3 * h + j], tc = k[4 * h + j];
            const double gh = m * g[j];
            const double gc = m * g[h + j] + gh * o * (1.0 - tc * tc);
            if (ga) {
              double* a = ga->data() + r * 4 * h;
              a[j] += gc * gg * i * (1.0 - i);
              a[h + j] += gc * p[h + j] * f * (1.0 - f);
              a[2 * h + j] += gc * i * (1.0 - gg * gg);
              a[3 * h + j] += gh * tc * o * (1.0 - o);
            }
            if (gs) {
              double* s = gs->data() + r * 2 * h;
              s[j] += (1.0 - m) * g[j];
              s[h + j] += (1.0 - m) * g[h + j] + gc * f;
            }
          }
        }
      });
}

}  // namespace pvae::ad
