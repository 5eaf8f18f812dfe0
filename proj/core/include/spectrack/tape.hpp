#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <deque>
#include <vector>

#include "spectrack/matrix.hpp"

namespace spectrack {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = std::numeric_limits<std::size_t>::max();

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
};

/// Linear record of primitive ops for reverse-mode differentiation.
///
/// Every op appends one node holding its forward value and a closure that
/// pushes the node's output gradient into its inputs. `backward` walks the
/// nodes once in reverse order; no graph search is needed since inputs are
/// always recorded before the ops that consume them.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Matrix value);
  /// Leaf that accumulates a gradient.
  Var variable(Matrix value);
  /// Appends an op node. `fn` runs only if some input requires a gradient.
  Var record(Matrix value, std::span<const Var> inputs, Backward fn);
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward fn) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(fn));
  }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient of the last backward root w.r.t. `v`; zeros if nothing reached it.
  Matrix grad(Var v) const;

  /// Accumulates into the gradient buffer of `v` (no-op for constants).
  void accumulate(Var v, const Matrix& g);
  /// Mutable gradient buffer of `v`, allocated as zeros on first access.
  Matrix& grad_buffer(Var v);

  /// Seeds d(root)/d(root) = 1 for a 1×1 root and runs every closure in reverse.
  void backward(Var root);

  void clear();
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // stable addresses: values stay valid while ops append
};

}  // namespace spectrack
