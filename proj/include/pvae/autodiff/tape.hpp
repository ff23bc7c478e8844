#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pvae/autodiff/tensor.hpp"

namespace pvae::ad {

/// A named, persistent trainable array. Tapes reference parameters through
/// leaf nodes; the parameter itself outlives any tape.
struct Parameter {
  std::string name;
  Tensor value;
};

enum class OpKind {
  Leaf,
  Constant,
  MatMul,
  Add,
  Sub,
  Mul,
  Div,
  AddRow,
  Scale,
  AddScalar,
  Sigmoid,
  Tanh,
  Exp,
  Log,
  Sqrt,
  Square,
  Relu,
  Concat,
  Slice,
  GatherRows,
  Reshape,
  Sum,
  Mean,
  RowSum,
  RowMean,
  L2Norm,
  Dot,
  SoftmaxXent,
  Mmd,
  LstmCell,
};

const char* op_name(OpKind kind) noexcept;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const std::vector<std::size_t>& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double item() const { return value().item(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

using GradientMap = std::unordered_map<const Parameter*, Tensor>;

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order, so
/// the node index is already a topological order; backward sweeps it in reverse.
class Tape {
 public:
  /// Backward rule: reads the node's gradient and accumulates into its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  struct Node {
    OpKind kind = OpKind::Constant;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;  // empty until the node is reached by backward
    BackwardFn backward;
    const Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var param(const Parameter& p);
  Var variable(Tensor value);
  Var constant(Tensor value);

  /// Records an op node. `backward` may be empty when no input needs a gradient.
  Var push(OpKind kind, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward);

  /// Runs the reverse sweep from a scalar root and returns the total gradient of
  /// every parameter leaf on the tape. Unreached parameters map to zeros.
  GradientMap backward(Var root);

  /// Gradient accumulated at `v` by the last backward(); zeros if unreached.
  Tensor gradient(Var v) const;

  const Node& node(std::size_t id) const { return nodes_[id]; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of node `id`, zero-initialised on first touch.
  Tensor& grad_buffer(std::size_t id);
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

}  // namespace pvae::ad
