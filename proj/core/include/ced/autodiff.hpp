#pragma once

// A small tape-based reverse-mode automatic differentiation engine over
// row-major 2-D tensors of doubles.
//
// Every op appends a node to the tape; Tape::backward() walks the tape in
// reverse creation order, so gradients are deterministic for a fixed program.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ced/types.hpp"

namespace ced::ad {

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::optional<std::vector<double>> grad;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, values(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor from_matrix(const Matrix& m);
  Matrix to_matrix() const;

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::size_t size() const { return values.size(); }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  void zero_grad() { grad.reset(); }
};

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const std::vector<double>& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  Var constant(const Matrix& value) { return constant(Tensor::from_matrix(value)); }

  /// Leaf bound to external storage; backward() accumulates into
  /// storage.grad. The storage must outlive the tape.
  Var parameter(Tensor& storage);

  /// Records an op result. `backprop` reads grad(self) and adds into the
  /// parents' gradients via grad_mut(). It only runs when some parent needs a
  /// gradient.
  Var record(Tensor value, std::initializer_list<Var> parents, Backprop backprop);

  /// Reverse sweep from a 1x1 loss. Throws GraphError when nothing has been
  /// recorded, when the loss is not scalar, or when called twice.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  const std::vector<double>& grad(std::size_t id) const;
  // Gradient buffer of a node during the reverse sweep; empty when the node
  // does not need a gradient.
  std::vector<double>& grad_mut(std::size_t id) { return nodes_[id].grad; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    Backprop backprop;
    Tensor* storage = nullptr;
    bool needs_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---- ops ------------------------------------------------------------------
// All ops require their inputs to live on the same tape.

Var matmul(Var a, Var b);
Var add_row(Var x, Var row);  // x (n x m) + row (1 x m) broadcast
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise
Var scale(Var x, double s);
Var add_scalar(Var x, double s);
Var square(Var x);
Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var exp(Var x);
Var log_clamped(Var x, double floor);  // ln(max(x, floor)); zero grad below floor
Var lgamma(Var x);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var softmax_rows(Var x);
Var sum_rows(Var x);  // n x m -> n x 1
Var sum_all(Var x);   // -> 1 x 1
Var mean_all(Var x);  // -> 1 x 1, compensated summation

}  // namespace ced::ad
