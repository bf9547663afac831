#include "ced/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ced/numeric.hpp"
#include "ced/special_functions.hpp"

namespace ced::ad {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : shape{rows, cols}, values(std::move(data)) {
  if (values.size() != rows * cols) throw GraphError("Tensor: data size does not match shape");
}

Tensor Tensor::from_matrix(const Matrix& m) { return {m.rows(), m.cols(), m.data()}; }

Matrix Tensor::to_matrix() const { return {rows(), cols(), values}; }

const Tensor& Var::value() const {
  if (!tape_) throw GraphError("Var: not attached to a tape");
  return tape_->value(id_);
}

const std::vector<double>& Var::grad() const {
  if (!tape_) throw GraphError("Var: not attached to a tape");
  return tape_->grad(id_);
}

double Var::scalar() const {
  const Tensor& t = value();
  if (t.size() != 1) throw GraphError("Var::scalar: tensor is not 1x1");
  return t.values[0];
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Tensor& storage) {
  Node n;
  n.value = Tensor(storage.rows(), storage.cols(), storage.values);
  n.storage = &storage;
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backprop backprop) {
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    if (p.tape() != this) throw GraphError("op inputs live on different tapes");
    n.needs_grad = n.needs_grad || nodes_[p.id()].needs_grad;
  }
  if (n.needs_grad) n.backprop = std::move(backprop);
  return push(std::move(n));
}

const std::vector<double>& Tape::grad(std::size_t id) const {
  const Node& n = nodes_.at(id);
  if (!consumed_) throw GraphError("gradient requested before backward()");
  return n.grad;
}

void Tape::backward(Var loss) {
  if (!loss.valid() || nodes_.empty()) {
    throw GraphError("backward() called before any forward computation was recorded");
  }
  if (loss.tape() != this) throw GraphError("backward(): loss belongs to another tape");
  if (consumed_) throw GraphError("backward() already ran on this tape");
  if (nodes_[loss.id()].value.size() != 1) throw GraphError("backward(): loss must be 1x1");
  consumed_ = true;

  for (Node& n : nodes_) {
    if (n.needs_grad) n.grad.assign(n.value.size(), 0.0);
  }
  if (!nodes_[loss.id()].needs_grad) return;
  nodes_[loss.id()].grad[0] = 1.0;

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backprop) n.backprop(*this, id);
  }
  for (Node& n : nodes_) {
    if (!n.storage) continue;
    auto& g = n.storage->grad;
    if (!g) g.emplace(n.grad.size(), 0.0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
  }
}

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw GraphError("op input is not attached to a tape");
  return *a.tape();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw GraphError(std::string(op) + ": shape mismatch");
  }
}

// Elementwise unary op with derivative expressed through input x and output y.
template <typename F, typename DF>
Var unary(Var x, F f, DF df) {
  Tape& t = tape_of(x);
  const Tensor& in = x.value();
  Tensor out(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.size(); ++i) out.values[i] = f(in.values[i]);
  const std::size_t xi = x.id();
  return t.record(std::move(out), {x}, [xi, df](Tape& tp, std::size_t self) {
    const auto& xv = tp.value(xi).values;
    const auto& yv = tp.value(self).values;
    const auto& gy = tp.grad_mut(self);
    auto& gx = tp.grad_mut(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) throw GraphError("matmul: inner dimensions differ");
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = &out.values[i * m];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av.values[i * k + p];
      const double* brow = &bv.values[p * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  const std::size_t ai = a.id(), bi = b.id();
  return t.record(std::move(out), {a, b}, [ai, bi, n, k, m](Tape& tp, std::size_t self) {
    const auto& g = tp.grad_mut(self);
    if (tp.needs_grad(ai)) {
      const auto& bvals = tp.value(bi).values;
      auto& ga = tp.grad_mut(ai);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * bvals[p * m + j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (tp.needs_grad(bi)) {
      const auto& avals = tp.value(ai).values;
      auto& gb = tp.grad_mut(bi);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = avals[i * k + p];
          for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += aip * g[i * m + j];
        }
      }
    }
  });
}

Var add_row(Var x, Var row) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != xv.cols()) throw GraphError("add_row: shape mismatch");
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.values[i * m + j] = xv.values[i * m + j] + rv.values[j];
  }
  const std::size_t xi = x.id(), ri = row.id();
  return t.record(std::move(out), {x, row}, [xi, ri, n, m](Tape& tp, std::size_t self) {
    const auto& g = tp.grad_mut(self);
    if (tp.needs_grad(xi)) {
      auto& gx = tp.grad_mut(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (tp.needs_grad(ri)) {
      auto& gr = tp.grad_mut(ri);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) gr[j] += g[i * m + j];
      }
    }
  });
}

namespace {

template <typename F, typename DA, typename DB>
Var binary(Var a, Var b, const char* name, F f, DA da, DB db) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape(av, bv, name);
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out.values[i] = f(av.values[i], bv.values[i]);
  const std::size_t ai = a.id(), bi = b.id();
  return t.record(std::move(out), {a, b}, [ai, bi, da, db](Tape& tp, std::size_t self) {
    const auto& g = tp.grad_mut(self);
    const auto& x = tp.value(ai).values;
    const auto& y = tp.value(bi).values;
    if (tp.needs_grad(ai)) {
      auto& ga = tp.grad_mut(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(x[i], y[i]);
    }
    if (tp.needs_grad(bi)) {
      auto& gb = tp.grad_mut(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * db(x[i], y[i]);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var scale(Var x, double s) {
  return unary(x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var add_scalar(Var x, double s) {
  return unary(x, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Var square(Var x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log_clamped(Var x, double floor) {
  return unary(
      x, [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v, double) { return v > floor ? 1.0 / v : 0.0; });
}

Var lgamma(Var x) {
  return unary(
      x, [](double v) { return log_gamma(v); }, [](double v, double) { return digamma(v); });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  if (begin >= end || end > xv.cols()) throw GraphError("slice_cols: bad column range");
  const std::size_t n = xv.rows(), m = xv.cols(), w = end - begin;
  Tensor out(n, w);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < w; ++j) out.values[i * w + j] = xv.values[i * m + begin + j];
  }
  const std::size_t xi = x.id();
  return t.record(std::move(out), {x}, [xi, n, m, w, begin](Tape& tp, std::size_t self) {
    const auto& g = tp.grad_mut(self);
    auto& gx = tp.grad_mut(xi);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < w; ++j) gx[i * m + begin + j] += g[i * w + j];
    }
  });
}

Var softmax_rows(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* in = &xv.values[i * m];
    double* o = &out.values[i * m];
    const double top = *std::max_element(in, in + m);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      o[j] = std::exp(in[j] - top);
      sum += o[j];
    }
    for (std::size_t j = 0; j < m; ++j) o[j] /= sum;
  }
  const std::size_t xi = x.id();
  return t.record(std::move(out), {x}, [xi, n, m](Tape& tp, std::size_t self) {
    const auto& y = tp.value(self).values;
    const auto& g = tp.grad_mut(self);
    auto& gx = tp.grad_mut(xi);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
      for (std::size_t j = 0; j < m; ++j) {
        gx[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
      }
    }
  });
}

Var sum_rows(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += xv.values[i * m + j];
    out.values[i] = s;
  }
  const std::size_t xi = x.id();
  return t.record(std::move(out), {x}, [xi, n, m](Tape& tp, std::size_t self) {
    const auto& g = tp.grad_mut(self);
    auto& gx = tp.grad_mut(xi);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) gx[i * m + j] += g[i];
    }
  });
}

Var sum_all(Var x) {
  Tape& t = tape_of(x);
  Tensor out(1, 1, compensated_sum(x.value().values));
  const std::size_t xi = x.id();
  return t.record(std::move(out), {x}, [xi](Tape& tp, std::size_t self) {
    const double g = tp.grad_mut(self)[0];
    for (double& v : tp.grad_mut(xi)) v += g;
  });
}

Var mean_all(Var x) {
  const std::size_t count = x.value().size();
  if (count == 0) throw GraphError("mean_all: empty tensor");
  return scale(sum_all(x), 1.0 / static_cast<double>(count));
}

}  // namespace ced::ad
