#pragma once

// Minimal reverse-mode automatic differentiation over dense 2-D tensors.
//
// Every op allocates a new Node holding its value and a closure that pushes
// the node's gradient to its parents. Graphs are rebuilt per batch; the
// parameters are long-lived leaf nodes shared by successive graphs.
//
// Binary elementwise ops broadcast: each operand dimension must equal the
// result dimension or be 1.

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace orbitpose::ad {

class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0);
  Tensor(int rows, int cols, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor(1, 1, value); }
  static Tensor row(std::vector<double> values);
  static Tensor column(std::vector<double> values);
  static Tensor identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double item() const;

  bool same_shape(const Tensor& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  std::string shape_string() const;
  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;
  std::string_view op = "leaf";
  bool requires_grad = false;
};

/// Leaf without gradient (inputs, targets).
Var constant(Tensor value);
/// Leaf that receives a gradient (trainable parameters).
Var parameter(Tensor value);

Var matmul(const Var& a, const Var& b);
/// Matrix (r x c) times column vector (c x 1).
Var matvec(const Var& m, const Var& x);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var shift(const Var& a, double s);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var square(const Var& a);
/// Elementwise atan2(y, x); operands must have equal shapes.
Var atan2(const Var& y, const Var& x);
/// Gradient passes only where lo < a < hi.
Var clamp(const Var& a, double lo, double hi);
/// Column-wise concatenation of operands with equal row counts.
Var concat(const std::vector<Var>& parts);
Var concat(const Var& a, const Var& b);
Var slice_cols(const Var& a, int begin, int end);
/// Sum of all entries, as a 1 x 1 node.
Var sum(const Var& a);
/// Sum over columns: (r x c) -> (r x 1).
Var row_sum(const Var& a);
/// sum_ij softplus(z_ij) - t_ij z_ij, i.e. binary cross-entropy of targets t
/// against sigmoid(z), summed over all entries. Targets must lie in [0, 1].
Var bce_with_logits(const Var& logits, const Tensor& targets);

/// Populates `grad` on every node reachable from `loss` (reverse topological
/// order). Gradients are zeroed first, so repeated calls do not accumulate.
void backward(const Var& loss);

}  // namespace orbitpose::ad
