#include "spectrack/tape.hpp"

#include "spectrack/error.hpp"

namespace spectrack {

const Matrix& Var::value() const { return tape->value(*this); }
bool Var::requires_grad() const { return tape->requires_grad(*this); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape != this) throw Error("tape: input recorded on a different tape");
    n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty() && !n.value.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix& Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  if (!nodes_[v.id].requires_grad) return;
  grad_buffer(v) += g;
}

void Tape::backward(Var root) {
  if (root.tape != this) throw Error("tape: backward root from a different tape");
  const Matrix& rv = nodes_[root.id].value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw DimensionError("backward: root must be 1x1, got " + rv.shape_str());
  }
  for (Node& n : nodes_) n.grad = Matrix();
  grad_buffer(root)(0, 0) = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    // Closures only write to inputs, which sit strictly earlier on the tape.
    n.backward(*this, n.grad);
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace spectrack
