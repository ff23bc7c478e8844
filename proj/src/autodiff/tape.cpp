#include "pvae/autodiff/tape.hpp"

#include "pvae/errors.hpp"

namespace pvae::ad {

const char* op_name(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::AddRow: return "add_row";
    case OpKind::Scale: return "scale";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::Square: return "square";
    case OpKind::Relu: return "relu";
    case OpKind::Concat: return "concat";
    case OpKind::Slice: return "slice";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::Reshape: return "reshape";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::RowSum: return "row_sum";
    case OpKind::RowMean: return "row_mean";
    case OpKind::L2Norm: return "l2norm";
    case OpKind::Dot: return "dot";
    case OpKind::SoftmaxXent: return "softmax_cross_entropy";
    case OpKind::Mmd: return "mmd";
    case OpKind::LstmCell: return "lstm_cell";
  }
  return "?";
}

Var Tape::param(const Parameter& p) {
  Node n;
  n.kind = OpKind::Leaf;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  Node n;
  n.kind = OpKind::Leaf;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.kind = OpKind::Constant;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::push(OpKind kind, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward) {
  Node n;
  n.kind = kind;
  for (std::size_t in : inputs) n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

GradientMap Tape::backward(Var root) {
  if (root.tape() != this) throw ContractError("backward root belongs to a different tape");
  const Tensor& rv = nodes_[root.id()].value;
  if (rv.size() != 1) {
    throw ContractError("backward root must be scalar, got shape " + shape_string(rv.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  grad_buffer(root.id())[0] = 1.0;

  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad || !n.backward) continue;
    n.backward(*this, i);
  }

  GradientMap out;
  for (Node& n : nodes_) {
    if (n.kind != OpKind::Leaf || n.param == nullptr) continue;
    auto [it, inserted] = out.try_emplace(n.param, Tensor::zeros_like(n.value));
    if (!n.grad.empty()) it->second += n.grad;
  }
  return out;
}

Tensor Tape::gradient(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.grad.empty() ? Tensor::zeros_like(n.value) : n.grad;
}

}  // namespace pvae::ad
