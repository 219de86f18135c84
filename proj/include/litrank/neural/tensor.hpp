#pragma once
// Dense reverse-mode automatic differentiation.
//
// A Tensor is a handle to a graph node. Each op allocates a new node that
// keeps its parents alive and a closure that pushes the node's gradient back
// into them. There is no global tape: graphs are owned by the tensors that
// reference them, so independent models never share state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace litrank::nn {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string shape_str(const Shape& s) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << s[i];
  out << ']';
  return out.str();
}

inline std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

namespace detail {

template <class T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

}  // namespace detail

template <class T>
class Tensor {
 public:
  using value_type = T;
  using Node = detail::Node<T>;
  using NodePtr = std::shared_ptr<Node>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (numel(shape) != values.size()) {
      throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " + shape_str(shape));
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }
  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const auto count = numel(shape);
    return from(std::move(shape), std::vector<T>(count, T(0)), requires_grad);
  }
  static Tensor scalar(T v, bool requires_grad = false) { return from({}, {v}, requires_grad); }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rank() const { return node_->shape.size(); }

  // Matrix view: rank 0 is 1x1, rank 1 is 1xn.
  std::size_t rows() const {
    const auto& s = shape();
    if (s.size() > 2) throw ShapeError("tensor of rank " + std::to_string(s.size()) + " used as a matrix");
    return s.size() == 2 ? s[0] : 1;
  }
  std::size_t cols() const {
    const auto& s = shape();
    if (s.size() > 2) throw ShapeError("tensor of rank " + std::to_string(s.size()) + " used as a matrix");
    return s.empty() ? 1 : s.back();
  }

  std::span<const T> data() const { return node_->value; }
  std::span<T> data() { return node_->value; }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }

  T item() const {
    if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
  }
  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }
  const NodePtr& node() const { return node_; }

  void zero_grad() {
    if (node_) node_->grad.assign(node_->value.size(), T(0));
  }

  // Same values, no history.
  Tensor detach() const { return from(shape(), node_->value, false); }

  // Reverse pass from a scalar. Leaf gradients accumulate across calls;
  // interior gradients are recomputed from zero each time.
  void backward() const {
    if (size() != 1) throw ShapeError("backward() needs a scalar, got shape " + shape_str(shape()));
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        Node* p = n->parents[next++].get();
        if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }
    for (auto* n : order) {
      if (n->is_leaf()) {
        n->ensure_grad();
      } else {
        n->grad.assign(n->value.size(), T(0));
      }
    }
    node_->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (!(*it)->is_leaf()) (*it)->backward(**it);
    }
  }

 private:
  NodePtr node_;
};

namespace detail {

template <class T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> value,
                      std::vector<std::shared_ptr<Node<T>>> parents, std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->op = op;
  n->shape = std::move(shape);
  n->value = std::move(value);
  const bool needs = std::any_of(parents.begin(), parents.end(), [](const auto& p) { return p->requires_grad; });
  if (needs) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Tensor<T>(std::move(n));
}

template <class T>
[[noreturn]] void shape_fail(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

// C[m x n] (+)= A[m x k] * B[k x n]. The i-k-j order fixes the summation order
// of every output element independently of its row, so stacked inputs give
// bit-identical rows regardless of their position.
template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
std::vector<T> transposed(const T* a, std::size_t rows, std::size_t cols) {
  std::vector<T> t(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = a[i * cols + j];
  return t;
}

// How `b` is broadcast against `a` in binary elementwise ops.
enum class Broadcast { same, row, scalar };

template <class T>
Broadcast broadcast_kind(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() == b.shape()) return Broadcast::same;
  if (b.size() == 1) return Broadcast::scalar;
  if (a.rank() <= 2 && b.rank() <= 2 && b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
  shape_fail(op, a, b);
}

template <class T>
std::size_t bindex(Broadcast k, std::size_t i, std::size_t cols) {
  switch (k) {
    case Broadcast::same: return i;
    case Broadcast::row: return i % cols;
    case Broadcast::scalar: return 0;
  }
  return 0;
}

template <class T, class Fwd, class Dfx>
Tensor<T> unary(const char* op, const Tensor<T>& x, Fwd fwd, Dfx dfx) {
  std::vector<T> out(x.size());
  const auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xs[i]);
  return make_result<T>(op, x.shape(), std::move(out), {x.node()}, [dfx](Node<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * dfx(p.value[i], self.value[i]);
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) detail::shape_fail("matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<T> out(m * n, T(0));
  detail::gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return detail::make_result<T>("matmul", {m, n}, std::move(out), {a.node(), b.node()},
                                [m, k, n](detail::Node<T>& self) {
                                  auto& pa = *self.parents[0];
                                  auto& pb = *self.parents[1];
                                  if (pa.requires_grad) {
                                    // dA = dC * B^T
                                    const auto bt = detail::transposed(pb.value.data(), k, n);
                                    detail::gemm_nn(self.grad.data(), bt.data(), pa.grad.data(), m, n, k);
                                  }
                                  if (pb.requires_grad) {
                                    // dB = A^T * dC
                                    const auto at = detail::transposed(pa.value.data(), m, k);
                                    detail::gemm_nn(at.data(), self.grad.data(), pb.grad.data(), k, m, n);
                                  }
                                });
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
  if (a.rank() != 2) throw ShapeError("transpose: needs rank 2, got " + shape_str(a.shape()));
  const std::size_t r = a.rows(), c = a.cols();
  return detail::make_result<T>("transpose", {c, r}, detail::transposed(a.data().data(), r, c), {a.node()},
                                [r, c](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t i = 0; i < r; ++i)
                                    for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += self.grad[j * r + i];
                                });
}

template <class T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (numel(shape) != a.size())
    throw ShapeError("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape));
  return detail::make_result<T>("reshape", std::move(shape), std::vector<T>(a.data().begin(), a.data().end()),
                                {a.node()}, [](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
                                });
}

// ---------------------------------------------------------------------------
// Elementwise with broadcasting of the second operand (same shape, 1 x n row, or scalar).

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const auto kind = detail::broadcast_kind("add", a, b);
  const std::size_t cols = kind == detail::Broadcast::row ? a.cols() : 1;
  std::vector<T> out(a.size());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[detail::bindex<T>(kind, i, cols)];
  return detail::make_result<T>("add", a.shape(), std::move(out), {a.node(), b.node()},
                                [kind, cols](detail::Node<T>& self) {
                                  auto& pa = *self.parents[0];
                                  auto& pb = *self.parents[1];
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                    if (pa.requires_grad) pa.grad[i] += self.grad[i];
                                    if (pb.requires_grad) pb.grad[detail::bindex<T>(kind, i, cols)] += self.grad[i];
                                  }
                                });
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  const auto kind = detail::broadcast_kind("sub", a, b);
  const std::size_t cols = kind == detail::Broadcast::row ? a.cols() : 1;
  std::vector<T> out(a.size());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[detail::bindex<T>(kind, i, cols)];
  return detail::make_result<T>("sub", a.shape(), std::move(out), {a.node(), b.node()},
                                [kind, cols](detail::Node<T>& self) {
                                  auto& pa = *self.parents[0];
                                  auto& pb = *self.parents[1];
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                    if (pa.requires_grad) pa.grad[i] += self.grad[i];
                                    if (pb.requires_grad) pb.grad[detail::bindex<T>(kind, i, cols)] -= self.grad[i];
                                  }
                                });
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  const auto kind = detail::broadcast_kind("mul", a, b);
  const std::size_t cols = kind == detail::Broadcast::row ? a.cols() : 1;
  std::vector<T> out(a.size());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[detail::bindex<T>(kind, i, cols)];
  return detail::make_result<T>("mul", a.shape(), std::move(out), {a.node(), b.node()},
                                [kind, cols](detail::Node<T>& self) {
                                  auto& pa = *self.parents[0];
                                  auto& pb = *self.parents[1];
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                    const auto j = detail::bindex<T>(kind, i, cols);
                                    if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.value[j];
                                    if (pb.requires_grad) pb.grad[j] += self.grad[i] * pa.value[i];
                                  }
                                });
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return detail::unary<T>("scale", a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  return detail::unary<T>("relu", x, [](T v) { return v > T(0) ? v : T(0); },
                          [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return detail::unary<T>(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Tensor<T> tanh(const Tensor<T>& x) {
  return detail::unary<T>("tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

// Exact (erf) GELU.
template <class T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T inv_sqrt2 = T(0.70710678118654752440);
  constexpr T inv_sqrt2pi = T(0.39894228040143267794);
  return detail::unary<T>(
      "gelu", x, [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
      [](T v, T) { return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(T(-0.5) * v * v); });
}

// ---------------------------------------------------------------------------
// Reductions

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  T s = T(0);
  for (const auto v : x.data()) s += v;
  return detail::make_result<T>("sum", {}, {s}, {x.node()}, [](detail::Node<T>& self) {
    auto& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0];
  });
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.size() == 0) throw ShapeError("mean: empty tensor");
  T s = T(0);
  for (const auto v : x.data()) s += v;
  const T n = static_cast<T>(x.size());
  return detail::make_result<T>("mean", {}, {s / n}, {x.node()}, [n](detail::Node<T>& self) {
    auto& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0] / n;
  });
}

// ---------------------------------------------------------------------------
// Structural

// Concatenates matrices along rows (axis 0) or columns (axis 1).
template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  std::vector<std::shared_ptr<detail::Node<T>>> parents;
  std::vector<std::size_t> extent;
  const std::size_t fixed = axis == 0 ? parts[0].cols() : parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if ((axis == 0 ? p.cols() : p.rows()) != fixed) detail::shape_fail("concat", parts[0], p);
    extent.push_back(axis == 0 ? p.rows() : p.cols());
    total += extent.back();
    parents.push_back(p.node());
  }
  const std::size_t rows = axis == 0 ? total : fixed;
  const std::size_t cols = axis == 0 ? fixed : total;
  std::vector<T> out(rows * cols);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].data();
    if (axis == 0) {
      std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(off * cols));
    } else {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < extent[k]; ++c) out[r * cols + off + c] = src[r * extent[k] + c];
    }
    off += extent[k];
  }
  return detail::make_result<T>("concat", {rows, cols}, std::move(out), std::move(parents),
                                [axis, extent, rows, cols](detail::Node<T>& self) {
                                  std::size_t o = 0;
                                  for (std::size_t k = 0; k < self.parents.size(); ++k) {
                                    auto& p = *self.parents[k];
                                    if (p.requires_grad) {
                                      if (axis == 0) {
                                        for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += self.grad[o * cols + i];
                                      } else {
                                        for (std::size_t r = 0; r < rows; ++r)
                                          for (std::size_t c = 0; c < extent[k]; ++c)
                                            p.grad[r * extent[k] + c] += self.grad[r * cols + o + c];
                                      }
                                    }
                                    o += extent[k];
                                  }
                                });
}

// Rows (axis 0) or columns (axis 1) in [begin, end).
template <class T>
Tensor<T> slice(const Tensor<T>& a, int axis, std::size_t begin, std::size_t end) {
  const std::size_t rows = a.rows(), cols = a.cols();
  const std::size_t extent = axis == 0 ? rows : cols;
  if ((axis != 0 && axis != 1) || begin > end || end > extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                     std::to_string(axis) + " of shape " + shape_str(a.shape()));
  }
  const std::size_t orows = axis == 0 ? end - begin : rows;
  const std::size_t ocols = axis == 0 ? cols : end - begin;
  std::vector<T> out(orows * ocols);
  const auto src = a.data();
  for (std::size_t r = 0; r < orows; ++r)
    for (std::size_t c = 0; c < ocols; ++c)
      out[r * ocols + c] = axis == 0 ? src[(begin + r) * cols + c] : src[r * cols + begin + c];
  return detail::make_result<T>("slice", {orows, ocols}, std::move(out), {a.node()},
                                [axis, begin, cols, orows, ocols](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t r = 0; r < orows; ++r)
                                    for (std::size_t c = 0; c < ocols; ++c) {
                                      const auto i = axis == 0 ? (begin + r) * cols + c : r * cols + begin + c;
                                      p.grad[i] += self.grad[r * ocols + c];
                                    }
                                });
}

// out[i] = table[ids[i]]; embedding lookup when `table` is an embedding matrix.
template <class T>
Tensor<T> gather_rows(const Tensor<T>& table, std::vector<std::size_t> ids, const char* op = "gather_rows") {
  const std::size_t rows = table.rows(), cols = table.cols();
  std::vector<T> out(ids.size() * cols);
  const auto src = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows)
      throw ShapeError(std::string(op) + ": id " + std::to_string(ids[i]) + " out of range for " + shape_str(table.shape()));
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(ids[i] * cols), cols,
                out.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  const Shape shape{ids.size(), cols};
  return detail::make_result<T>(op, shape, std::move(out), {table.node()},
                                [ids = std::move(ids), cols](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t i = 0; i < ids.size(); ++i)
                                    for (std::size_t c = 0; c < cols; ++c) p.grad[ids[i] * cols + c] += self.grad[i * cols + c];
                                });
}

template <class T>
Tensor<T> embedding_lookup(const Tensor<T>& table, std::vector<std::size_t> ids) {
  return gather_rows(table, std::move(ids), "embedding_lookup");
}

// A `rows` x n matrix of zeros with src[i] added into row ids[i].
template <class T>
Tensor<T> scatter_rows(const Tensor<T>& src, std::vector<std::size_t> ids, std::size_t rows) {
  const std::size_t cols = src.cols();
  if (ids.size() != src.rows()) throw ShapeError("scatter_rows: " + std::to_string(ids.size()) + " ids for " + shape_str(src.shape()));
  std::vector<T> out(rows * cols, T(0));
  const auto s = src.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows) throw ShapeError("scatter_rows: id " + std::to_string(ids[i]) + " out of range");
    for (std::size_t c = 0; c < cols; ++c) out[ids[i] * cols + c] += s[i * cols + c];
  }
  return detail::make_result<T>("scatter_rows", {rows, cols}, std::move(out), {src.node()},
                                [ids = std::move(ids), cols](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t i = 0; i < ids.size(); ++i)
                                    for (std::size_t c = 0; c < cols; ++c) p.grad[i * cols + c] += self.grad[ids[i] * cols + c];
                                });
}

// ---------------------------------------------------------------------------
// Row-wise normalizations

template <class T>
Tensor<T> softmax_rows(const Tensor<T>& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<T> out(x.size());
  const auto v = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = v.data() + r * cols;
    T* o = out.data() + r * cols;
    const T mx = *std::max_element(in, in + cols);
    T s = T(0);
    for (std::size_t c = 0; c < cols; ++c) s += (o[c] = std::exp(in[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) o[c] /= s;
  }
  return detail::make_result<T>("softmax_rows", x.shape(), std::move(out), {x.node()},
                                [rows, cols](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t r = 0; r < rows; ++r) {
                                    const T* y = self.value.data() + r * cols;
                                    const T* g = self.grad.data() + r * cols;
                                    T dot = T(0);
                                    for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
                                    for (std::size_t c = 0; c < cols; ++c) p.grad[r * cols + c] += y[c] * (g[c] - dot);
                                  }
                                });
}

// (x - mean) / sqrt(var + eps) per row, population variance. No affine part.
template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, T eps = T(1e-5)) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<T> out(x.size());
  std::vector<T> inv_std(rows);
  const auto v = x.data();
  const T n = static_cast<T>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = v.data() + r * cols;
    T mu = T(0);
    for (std::size_t c = 0; c < cols; ++c) mu += in[c];
    mu /= n;
    T var = T(0);
    for (std::size_t c = 0; c < cols; ++c) var += (in[c] - mu) * (in[c] - mu);
    var /= n;
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = (in[c] - mu) * inv_std[r];
  }
  return detail::make_result<T>("layer_norm", x.shape(), std::move(out), {x.node()},
                                [rows, cols, n, inv_std = std::move(inv_std)](detail::Node<T>& self) {
                                  auto& p = *self.parents[0];
                                  for (std::size_t r = 0; r < rows; ++r) {
                                    const T* y = self.value.data() + r * cols;
                                    const T* g = self.grad.data() + r * cols;
                                    T gsum = T(0), gy = T(0);
                                    for (std::size_t c = 0; c < cols; ++c) {
                                      gsum += g[c];
                                      gy += g[c] * y[c];
                                    }
                                    for (std::size_t c = 0; c < cols; ++c)
                                      p.grad[r * cols + c] += inv_std[r] * (g[c] - gsum / n - y[c] * gy / n);
                                  }
                                });
}

// ---------------------------------------------------------------------------

// Scalar node whose value and gradient w.r.t. `x` were computed outside the
// graph (closed-form losses). backward adds upstream * dvalue_dx into x.
template <class T>
Tensor<T> external_scalar(const Tensor<T>& x, T value, std::vector<T> dvalue_dx, const char* op = "external") {
  if (dvalue_dx.size() != x.size()) throw ShapeError(std::string(op) + ": gradient size mismatch");
  return detail::make_result<T>(op, {}, {value}, {x.node()}, [g = std::move(dvalue_dx)](detail::Node<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += self.grad[0] * g[i];
  });
}

}  // namespace litrank::nn
