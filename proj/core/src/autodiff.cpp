#include "orbitpose/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "orbitpose/errors.hpp"

namespace orbitpose::ad {

Tensor::Tensor(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("tensor dimensions must be nonnegative");
  data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
}

Tensor::Tensor(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ShapeError("tensor data size does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Tensor Tensor::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(n, 1, std::move(values));
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string());
  return data_[0];
}

std::string Tensor::shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

namespace {

Var make_node(Tensor value, std::vector<Var> parents, std::string_view op, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  n->requires_grad = std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p->requires_grad; });
  n->parents = std::move(parents);
  if (n->requires_grad) n->backward_fn = std::move(fn);
  return n;
}

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

int broadcast_dim(std::string_view op, const Tensor& a, const Tensor& b, int da, int db) {
  if (da == db || db == 1) return da;
  if (da == 1) return db;
  shape_fail(op, a, b);
}

// Accumulates g (result-shaped) into target (possibly broadcast) by summing
// over broadcast dimensions, scaled elementwise by `factor(i, j)`.
template <class F>
void accumulate_broadcast(Tensor& target, const Tensor& g, F factor) {
  const bool br = target.rows() == 1 && g.rows() != 1;
  const bool bc = target.cols() == 1 && g.cols() != 1;
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      target(br ? 0 : i, bc ? 0 : j) += g(i, j) * factor(i, j);
    }
  }
}

inline double at_broadcast(const Tensor& t, int i, int j) {
  return t(t.rows() == 1 ? 0 : i, t.cols() == 1 ? 0 : j);
}

template <class Fwd, class Da, class Db>
Var binary(std::string_view op, const Var& a, const Var& b, Fwd fwd, Da dfa, Db dfb) {
  const Tensor& va = a->value;
  const Tensor& vb = b->value;
  const int rows = broadcast_dim(op, va, vb, va.rows(), vb.rows());
  const int cols = broadcast_dim(op, va, vb, va.cols(), vb.cols());
  Tensor out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = fwd(at_broadcast(va, i, j), at_broadcast(vb, i, j));
  return make_node(std::move(out), {a, b}, op, [dfa, dfb](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      accumulate_broadcast(pa.grad, self.grad, [&](int i, int j) {
        return dfa(at_broadcast(pa.value, i, j), at_broadcast(pb.value, i, j));
      });
    }
    if (pb.requires_grad) {
      accumulate_broadcast(pb.grad, self.grad, [&](int i, int j) {
        return dfb(at_broadcast(pa.value, i, j), at_broadcast(pb.value, i, j));
      });
    }
  });
}

// Elementwise unary op whose derivative is expressed through the input x and
// the output y.
template <class Fwd, class Deriv>
Var unary(std::string_view op, const Var& a, Fwd fwd, Deriv deriv) {
  Tensor out(a->value.rows(), a->value.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(a->value[i]);
  return make_node(std::move(out), {a}, op, [deriv](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * deriv(p.value[i], self.value[i]);
  });
}

}  // namespace

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "constant";
  return n;
}

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "parameter";
  n->requires_grad = true;
  return n;
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.cols() != B.rows()) shape_fail("matmul", A, B);
  const int m = A.rows();
  const int k = A.cols();
  const int n = B.cols();
  Tensor C(m, n);
  for (int i = 0; i < m; ++i) {
    double* c = &C(i, 0);
    for (int p = 0; p < k; ++p) {
      const double av = A(i, p);
      if (av == 0.0) continue;
      const double* brow = &B.data()[static_cast<std::size_t>(p * n)];
      for (int j = 0; j < n; ++j) c[j] += av * brow[j];
    }
  }
  return make_node(std::move(C), {a, b}, "matmul", [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const Tensor& G = self.grad;
    if (pa.requires_grad) {
      // dA = G * B^T
      for (int i = 0; i < m; ++i) {
        const double* g = &G.data()[static_cast<std::size_t>(i * n)];
        for (int p = 0; p < k; ++p) {
          const double* brow = &pb.value.data()[static_cast<std::size_t>(p * n)];
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += g[j] * brow[j];
          pa.grad(i, p) += acc;
        }
      }
    }
    if (pb.requires_grad) {
      // dB = A^T * G
      for (int i = 0; i < m; ++i) {
        const double* g = &G.data()[static_cast<std::size_t>(i * n)];
        for (int p = 0; p < k; ++p) {
          const double av = pa.value(i, p);
          if (av == 0.0) continue;
          double* db = &pb.grad.data()[static_cast<std::size_t>(p * n)];
          for (int j = 0; j < n; ++j) db[j] += av * g[j];
        }
      }
    }
  });
}

Var matvec(const Var& m, const Var& x) {
  if (x->value.cols() != 1) throw ShapeError("matvec: right operand must be a column vector, got " + x->value.shape_string());
  return matmul(m, x);
}

Var add(const Var& a, const Var& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var scale(const Var& a, double s) {
  return unary("scale", a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var shift(const Var& a, double s) {
  return unary("shift", a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var relu(const Var& a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(const Var& a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sin(const Var& a) {
  return unary("sin", a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Var cos(const Var& a) {
  return unary("cos", a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}

Var square(const Var& a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var atan2(const Var& y, const Var& x) {
  if (!y->value.same_shape(x->value)) shape_fail("atan2", y->value, x->value);
  return binary(
      "atan2", y, x, [](double yy, double xx) { return std::atan2(yy, xx); },
      [](double yy, double xx) {
        const double r2 = xx * xx + yy * yy;
        return r2 > 0.0 ? xx / r2 : 0.0;
      },
      [](double yy, double xx) {
        const double r2 = xx * xx + yy * yy;
        return r2 > 0.0 ? -yy / r2 : 0.0;
      });
}

Var clamp(const Var& a, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("clamp: lower bound exceeds upper bound");
  return unary("clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const int rows = parts.front()->value.rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p->value.rows() != rows) shape_fail("concat", parts.front()->value, p->value);
    cols += p->value.cols();
  }
  Tensor out(rows, cols);
  int offset = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < p->value.cols(); ++j) out(i, offset + j) = p->value(i, j);
    offset += p->value.cols();
  }
  return make_node(std::move(out), parts, "concat", [](Node& self) {
    int off = 0;
    for (auto& p : self.parents) {
      const int c = p->value.cols();
      if (p->requires_grad) {
        for (int i = 0; i < self.grad.rows(); ++i)
          for (int j = 0; j < c; ++j) p->grad(i, j) += self.grad(i, off + j);
      }
      off += c;
    }
  });
}

Var concat(const Var& a, const Var& b) { return concat(std::vector<Var>{a, b}); }

Var slice_cols(const Var& a, int begin, int end) {
  const Tensor& v = a->value;
  if (begin < 0 || end > v.cols() || begin >= end) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for shape " + v.shape_string());
  }
  Tensor out(v.rows(), end - begin);
  for (int i = 0; i < v.rows(); ++i)
    for (int j = begin; j < end; ++j) out(i, j - begin) = v(i, j);
  return make_node(std::move(out), {a}, "slice_cols", [begin](Node& self) {
    Node& p = *self.parents[0];
    for (int i = 0; i < self.grad.rows(); ++i)
      for (int j = 0; j < self.grad.cols(); ++j) p.grad(i, begin + j) += self.grad(i, j);
  });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double x : a->value.data()) total += x;
  return make_node(Tensor::scalar(total), {a}, "sum", [](Node& self) {
    Node& p = *self.parents[0];
    const double g = self.grad[0];
    for (double& x : p.grad.data()) x += g;
  });
}

Var row_sum(const Var& a) {
  const Tensor& v = a->value;
  Tensor out(v.rows(), 1);
  for (int i = 0; i < v.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < v.cols(); ++j) acc += v(i, j);
    out(i, 0) = acc;
  }
  return make_node(std::move(out), {a}, "row_sum", [](Node& self) {
    Node& p = *self.parents[0];
    for (int i = 0; i < p.grad.rows(); ++i)
      for (int j = 0; j < p.grad.cols(); ++j) p.grad(i, j) += self.grad(i, 0);
  });
}

Var bce_with_logits(const Var& logits, const Tensor& targets) {
  const Tensor& z = logits->value;
  if (!z.same_shape(targets)) shape_fail("bce_with_logits", z, targets);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double t = targets[i];
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("bce_with_logits: target outside [0, 1]");
    const double x = z[i];
    // softplus(x) = max(x, 0) + log1p(exp(-|x|))
    total += std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) - t * x;
  }
  return make_node(Tensor::scalar(total), {logits}, "bce_with_logits", [targets](Node& self) {
    Node& p = *self.parents[0];
    const double g = self.grad[0];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double x = p.value[i];
      const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      p.grad[i] += g * (s - targets[i]);
    }
  });
}

void backward(const Var& loss) {
  if (!loss) throw InvalidArgument("backward: null loss");
  if (loss->value.size() != 1) {
    throw InvalidArgument("backward: loss must be scalar, got shape " + loss->value.shape_string());
  }
  // Iterative post-order DFS; `order` ends up in topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->grad = Tensor(n->value.rows(), n->value.cols());
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace orbitpose::ad
