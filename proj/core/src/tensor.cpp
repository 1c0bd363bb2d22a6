#include "eegraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace eegraph {

namespace {

std::size_t shape_product(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t e : s) n *= e;
  return n;
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a,
                              const Tensor& b) {
  throw std::invalid_argument(op + ": incompatible shapes " +
                              shape_to_string(a.shape()) + " and " +
                              shape_to_string(b.shape()));
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a) {
  throw std::invalid_argument(op + ": unsupported shape " +
                              shape_to_string(a.shape()));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined())
    throw std::invalid_argument(std::string(op) + ": undefined tensor operand");
}

thread_local int no_grad_depth = 0;

}  // namespace

std::string shape_to_string(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << "]";
  return os.str();
}

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }
bool autograd_enabled() { return no_grad_depth == 0; }

// ---- Tensor basics ----

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double fill, bool requires_grad) {
  auto n = std::make_shared<detail::Node>();
  n->value.assign(shape_product(shape), fill);
  n->shape = std::move(shape);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  if (shape_product(shape) != values.size())
    throw std::invalid_argument(
        "Tensor::from_vector: shape " + shape_to_string(shape) + " needs " +
        std::to_string(shape_product(shape)) + " values, got " +
        std::to_string(values.size()));
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_vector({1}, {v}, requires_grad);
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data()[i * n + i] = 1.0;
  return t;
}

const Shape& Tensor::shape() const {
  static const Shape empty;
  return node_ ? node_->shape : empty;
}

std::size_t Tensor::size() const { return node_ ? node_->value.size() : 0; }

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= rank())
    throw std::invalid_argument("Tensor::extent: axis " + std::to_string(axis) +
                                " out of range for " + shape_to_string(shape()));
  return shape()[axis];
}

const double* Tensor::data() const { return node_->value.data(); }
double* Tensor::data() { return node_->value.data(); }
const std::vector<double>& Tensor::values() const { return node_->value; }

double Tensor::at(std::size_t i) const { return node_->value.at(i); }
double Tensor::at(std::size_t i, std::size_t j) const {
  return node_->value.at(i * shape()[1] + j);
}
double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return node_->value.at((i * shape()[1] + j) * shape()[2] + k);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool rg) {
  require_defined(*this, "set_requires_grad");
  node_->requires_grad = rg;
}

bool Tensor::has_grad() const {
  return node_ && node_->grad.size() == node_->value.size();
}

const std::vector<double>& Tensor::grad() const {
  if (!has_grad())
    throw std::runtime_error("Tensor::grad: no gradient populated");
  return node_->grad;
}

std::vector<double>& Tensor::grad_buffer() {
  require_defined(*this, "grad_buffer");
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  if (node_) node_->grad.assign(node_->value.size(), 0.0);
}

// ---- graph recording ----

Tensor make_op(Shape shape, std::vector<double> value,
               const std::vector<Tensor>& inputs,
               std::function<void(detail::Node&)> backprop) {
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool track = autograd_enabled();
  if (track) {
    for (const auto& in : inputs)
      if (in.requires_grad()) {
        n->requires_grad = true;
        n->parents.push_back(in.node_ptr());
      }
  }
  if (n->requires_grad) n->backprop = std::move(backprop);
  return Tensor(std::move(n));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw std::invalid_argument(
        "backward: loss must be a scalar tensor, got shape " +
        shape_to_string(loss.shape()));
  if (!loss.requires_grad()) return;

  // iterative post-order DFS; children appear after their parents when the
  // collected order is reversed
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  struct Frame {
    detail::Node* n;
    std::size_t next_parent;
  };
  std::vector<Frame> stack{{loss.node(), 0}};
  visited.insert(loss.node());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.n->parents.size()) {
      detail::Node* p = f.n->parents[f.next_parent++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backprop && n->grad.size() == n->value.size()) n->backprop(*n);
  }
}

// ---- primitives ----

namespace {

// accumulate helper: parent may not require grad, in which case skip
void axpy_into(const Tensor& t, const std::vector<double>& contrib) {
  if (!t.requires_grad()) return;
  auto& g = const_cast<Tensor&>(t).grad_buffer();
  for (std::size_t i = 0; i < contrib.size(); ++i) g[i] += contrib[i];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  const auto& sa = a.shape();
  const auto& sb = b.shape();

  // three layouts: (m,k)x(k,n) -> (m,n); (k)x(k,n) -> (n); (m,k)x(k) -> (m)
  std::size_t m, k, n;
  Shape out_shape;
  if (sa.size() == 2 && sb.size() == 2) {
    if (sa[1] != sb[0]) shape_error("matmul", a, b);
    m = sa[0], k = sa[1], n = sb[1];
    out_shape = {m, n};
  } else if (sa.size() == 1 && sb.size() == 2) {
    if (sa[0] != sb[0]) shape_error("matmul", a, b);
    m = 1, k = sa[0], n = sb[1];
    out_shape = {n};
  } else if (sa.size() == 2 && sb.size() == 1) {
    if (sa[1] != sb[0]) shape_error("matmul", a, b);
    m = sa[0], k = sa[1], n = 1;
    out_shape = {m};
  } else {
    shape_error("matmul", a, b);
  }

  std::vector<double> out(m * n, 0.0);
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = pa[i * k + kk];
      if (av == 0.0) continue;
      const double* brow = pb + kk * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }

  return make_op(std::move(out_shape), std::move(out), {a, b},
                 [a, b, m, k, n](detail::Node& self) {
                   const auto& g = self.grad;
                   if (a.requires_grad()) {
                     std::vector<double> da(m * k, 0.0);
                     const double* pb = b.data();
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < n; ++j) {
                         const double gv = g[i * n + j];
                         if (gv == 0.0) continue;
                         for (std::size_t kk = 0; kk < k; ++kk)
                           da[i * k + kk] += gv * pb[kk * n + j];
                       }
                     axpy_into(a, da);
                   }
                   if (b.requires_grad()) {
                     std::vector<double> db(k * n, 0.0);
                     const double* pa = a.data();
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t kk = 0; kk < k; ++kk) {
                         const double av = pa[i * k + kk];
                         if (av == 0.0) continue;
                         for (std::size_t j = 0; j < n; ++j)
                           db[kk * n + j] += av * g[i * n + j];
                       }
                     axpy_into(b, db);
                   }
                 });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  if (a.shape() == b.shape()) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = a.data()[i] + b.data()[i];
    return make_op(a.shape(), std::move(out), {a, b},
                   [a, b](detail::Node& self) {
                     axpy_into(a, self.grad);
                     axpy_into(b, self.grad);
                   });
  }
  // bias vector onto matrix rows: (m,n) + (n)
  if (a.rank() == 2 && b.rank() == 1 && a.shape()[1] == b.shape()[0]) {
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out[i * n + j] = a.data()[i * n + j] + b.data()[j];
    return make_op(a.shape(), std::move(out), {a, b},
                   [a, b, m, n](detail::Node& self) {
                     axpy_into(a, self.grad);
                     if (b.requires_grad()) {
                       std::vector<double> db(n, 0.0);
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           db[j] += self.grad[i * n + j];
                       axpy_into(b, db);
                     }
                   });
  }
  shape_error("add", a, b);
}

Tensor add_scalar(const Tensor& a, const Tensor& s) {
  require_defined(a, "add_scalar");
  require_defined(s, "add_scalar");
  if (!s.is_scalar()) shape_error("add_scalar: scalar operand", s);
  const double sv = s.data()[0];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + sv;
  return make_op(a.shape(), std::move(out), {a, s},
                 [a, s](detail::Node& self) {
                   axpy_into(a, self.grad);
                   if (s.requires_grad()) {
                     double acc = 0.0;
                     for (double g : self.grad) acc += g;
                     axpy_into(s, {acc});
                   }
                 });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.data()[i] * b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b},
                 [a, b](detail::Node& self) {
                   if (a.requires_grad()) {
                     std::vector<double> da(self.grad.size());
                     for (std::size_t i = 0; i < da.size(); ++i)
                       da[i] = self.grad[i] * b.data()[i];
                     axpy_into(a, da);
                   }
                   if (b.requires_grad()) {
                     std::vector<double> db(self.grad.size());
                     for (std::size_t i = 0; i < db.size(); ++i)
                       db[i] = self.grad[i] * a.data()[i];
                     axpy_into(b, db);
                   }
                 });
}

Tensor scale(const Tensor& a, double c) {
  require_defined(a, "scale");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * c;
  return make_op(a.shape(), std::move(out), {a},
                 [a, c](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(self.grad.size());
                   for (std::size_t i = 0; i < da.size(); ++i)
                     da[i] = self.grad[i] * c;
                   axpy_into(a, da);
                 });
}

Tensor scale_by(const Tensor& a, const Tensor& s) {
  require_defined(a, "scale_by");
  require_defined(s, "scale_by");
  if (!s.is_scalar()) shape_error("scale_by: scalar operand", s);
  const double sv = s.data()[0];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * sv;
  return make_op(a.shape(), std::move(out), {a, s},
                 [a, s, sv](detail::Node& self) {
                   if (a.requires_grad()) {
                     std::vector<double> da(self.grad.size());
                     for (std::size_t i = 0; i < da.size(); ++i)
                       da[i] = self.grad[i] * sv;
                     axpy_into(a, da);
                   }
                   if (s.requires_grad()) {
                     double acc = 0.0;
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       acc += self.grad[i] * a.data()[i];
                     axpy_into(s, {acc});
                   }
                 });
}

namespace {

Tensor unary_op(const Tensor& a, const char* name,
                double (*f)(double), double (*df)(double /*x*/, double /*y*/)) {
  require_defined(a, name);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a.data()[i]);
  return make_op(a.shape(), std::move(out), {a},
                 [a, df](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(self.grad.size());
                   for (std::size_t i = 0; i < da.size(); ++i)
                     da[i] = self.grad[i] * df(a.data()[i], self.value[i]);
                   axpy_into(a, da);
                 });
}

}  // namespace

Tensor relu(const Tensor& a) {
  return unary_op(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_op(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(const Tensor& a) {
  return unary_op(
      a, "abs", [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor softmax(const Tensor& a) {
  require_defined(a, "softmax");
  if (a.rank() != 1 && a.rank() != 2) shape_error("softmax", a);
  const std::size_t rows = a.rank() == 2 ? a.shape()[0] : 1;
  const std::size_t cols = a.rank() == 2 ? a.shape()[1] : a.shape()[0];
  if (cols == 0) shape_error("softmax", a);

  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = a.data() + r * cols;
    double* o = out.data() + r * cols;
    double mx = in[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      denom += o[j];
    }
    for (std::size_t j = 0; j < cols; ++j) o[j] /= denom;
  }
  return make_op(a.shape(), std::move(out), {a},
                 [a, rows, cols](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(self.grad.size());
                   for (std::size_t r = 0; r < rows; ++r) {
                     const double* y = self.value.data() + r * cols;
                     const double* g = self.grad.data() + r * cols;
                     double dot = 0.0;
                     for (std::size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
                     for (std::size_t j = 0; j < cols; ++j)
                       da[r * cols + j] = y[j] * (g[j] - dot);
                   }
                   axpy_into(a, da);
                 });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty())
    throw std::invalid_argument("concat: needs at least one tensor");
  for (const auto& p : parts) require_defined(p, "concat");
  const std::size_t rnk = parts[0].rank();
  for (const auto& p : parts)
    if (p.rank() != rnk) shape_error("concat", parts[0], p);

  if (rnk == 1 && axis == 0) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    std::vector<double> out;
    out.reserve(total);
    for (const auto& p : parts)
      out.insert(out.end(), p.data(), p.data() + p.size());
    auto parts_copy = parts;
    return make_op({total}, std::move(out), parts,
                   [parts_copy](detail::Node& self) {
                     std::size_t off = 0;
                     for (const auto& p : parts_copy) {
                       if (p.requires_grad()) {
                         std::vector<double> dp(
                             self.grad.begin() + static_cast<long>(off),
                             self.grad.begin() + static_cast<long>(off + p.size()));
                         axpy_into(p, dp);
                       }
                       off += p.size();
                     }
                   });
  }

  if (rnk == 2 && axis == 0) {
    const std::size_t cols = parts[0].shape()[1];
    std::size_t rows = 0;
    for (const auto& p : parts) {
      if (p.shape()[1] != cols) shape_error("concat", parts[0], p);
      rows += p.shape()[0];
    }
    std::vector<double> out;
    out.reserve(rows * cols);
    for (const auto& p : parts)
      out.insert(out.end(), p.data(), p.data() + p.size());
    auto parts_copy = parts;
    return make_op({rows, cols}, std::move(out), parts,
                   [parts_copy](detail::Node& self) {
                     std::size_t off = 0;
                     for (const auto& p : parts_copy) {
                       if (p.requires_grad()) {
                         std::vector<double> dp(
                             self.grad.begin() + static_cast<long>(off),
                             self.grad.begin() + static_cast<long>(off + p.size()));
                         axpy_into(p, dp);
                       }
                       off += p.size();
                     }
                   });
  }

  if (rnk == 2 && axis == 1) {
    const std::size_t rows = parts[0].shape()[0];
    std::size_t cols = 0;
    for (const auto& p : parts) {
      if (p.shape()[0] != rows) shape_error("concat", parts[0], p);
      cols += p.shape()[1];
    }
    std::vector<double> out(rows * cols);
    std::size_t col_off = 0;
    for (const auto& p : parts) {
      const std::size_t pc = p.shape()[1];
      for (std::size_t i = 0; i < rows; ++i)
        std::memcpy(out.data() + i * cols + col_off, p.data() + i * pc,
                    pc * sizeof(double));
      col_off += pc;
    }
    auto parts_copy = parts;
    return make_op({rows, cols}, std::move(out), parts,
                   [parts_copy, rows, cols](detail::Node& self) {
                     std::size_t col_off = 0;
                     for (const auto& p : parts_copy) {
                       const std::size_t pc = p.shape()[1];
                       if (p.requires_grad()) {
                         std::vector<double> dp(rows * pc);
                         for (std::size_t i = 0; i < rows; ++i)
                           std::memcpy(dp.data() + i * pc,
                                       self.grad.data() + i * cols + col_off,
                                       pc * sizeof(double));
                         axpy_into(p, dp);
                       }
                       col_off += pc;
                     }
                   });
  }

  throw std::invalid_argument("concat: axis " + std::to_string(axis) +
                              " unsupported for rank " + std::to_string(rnk));
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty())
    throw std::invalid_argument("stack_rows: needs at least one row");
  const std::size_t f = rows[0].size();
  for (const auto& r : rows) {
    require_defined(r, "stack_rows");
    if (r.rank() != 1 || r.size() != f) shape_error("stack_rows", rows[0], r);
  }
  std::vector<double> out;
  out.reserve(rows.size() * f);
  for (const auto& r : rows) out.insert(out.end(), r.data(), r.data() + f);
  auto rows_copy = rows;
  return make_op({rows.size(), f}, std::move(out), rows,
                 [rows_copy, f](detail::Node& self) {
                   for (std::size_t i = 0; i < rows_copy.size(); ++i) {
                     const auto& r = rows_copy[i];
                     if (!r.requires_grad()) continue;
                     std::vector<double> dr(
                         self.grad.begin() + static_cast<long>(i * f),
                         self.grad.begin() + static_cast<long>((i + 1) * f));
                     axpy_into(r, dr);
                   }
                 });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require_defined(a, "reshape");
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  if (n != a.size())
    throw std::invalid_argument("reshape: cannot view " +
                                shape_to_string(a.shape()) + " as " +
                                shape_to_string(shape));
  std::vector<double> out(a.data(), a.data() + a.size());
  return make_op(std::move(shape), std::move(out), {a},
                 [a](detail::Node& self) { axpy_into(a, self.grad); });
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  if (a.rank() != 2) shape_error("transpose", a);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.data()[i * n + j];
  return make_op({n, m}, std::move(out), {a},
                 [a, m, n](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(m * n);
                   for (std::size_t i = 0; i < m; ++i)
                     for (std::size_t j = 0; j < n; ++j)
                       da[i * n + j] = self.grad[j * m + i];
                   axpy_into(a, da);
                 });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
  return make_op({1}, {acc}, {a}, [a](detail::Node& self) {
    if (!a.requires_grad()) return;
    std::vector<double> da(a.size(), self.grad[0]);
    axpy_into(a, da);
  });
}

Tensor mean(const Tensor& a) {
  require_defined(a, "mean");
  if (a.size() == 0) shape_error("mean", a);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
  const double inv = 1.0 / static_cast<double>(a.size());
  return make_op({1}, {acc * inv}, {a}, [a, inv](detail::Node& self) {
    if (!a.requires_grad()) return;
    std::vector<double> da(a.size(), self.grad[0] * inv);
    axpy_into(a, da);
  });
}

Tensor max(const Tensor& a) {
  require_defined(a, "max");
  if (a.size() == 0) shape_error("max", a);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a.data()[i] > a.data()[arg]) arg = i;  // ties keep the lowest index
  return make_op({1}, {a.data()[arg]}, {a}, [a, arg](detail::Node& self) {
    if (!a.requires_grad()) return;
    std::vector<double> da(a.size(), 0.0);
    da[arg] = self.grad[0];
    axpy_into(a, da);
  });
}

namespace {

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2)
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got " +
                                shape_to_string(a.shape()));
}

}  // namespace

Tensor sum_rows(const Tensor& a) {
  require_defined(a, "sum_rows");
  require_matrix(a, "sum_rows");
  const std::size_t n = a.shape()[0], f = a.shape()[1];
  std::vector<double> out(f, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) out[j] += a.data()[i * f + j];
  return make_op({f}, std::move(out), {a}, [a, n, f](detail::Node& self) {
    if (!a.requires_grad()) return;
    std::vector<double> da(n * f);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) da[i * f + j] = self.grad[j];
    axpy_into(a, da);
  });
}

Tensor mean_rows(const Tensor& a) {
  require_defined(a, "mean_rows");
  require_matrix(a, "mean_rows");
  const std::size_t n = a.shape()[0], f = a.shape()[1];
  if (n == 0) shape_error("mean_rows", a);
  const double inv = 1.0 / static_cast<double>(n);
  std::vector<double> out(f, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) out[j] += a.data()[i * f + j] * inv;
  return make_op({f}, std::move(out), {a}, [a, n, f, inv](detail::Node& self) {
    if (!a.requires_grad()) return;
    std::vector<double> da(n * f);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) da[i * f + j] = self.grad[j] * inv;
    axpy_into(a, da);
  });
}

Tensor max_rows(const Tensor& a) {
  require_defined(a, "max_rows");
  require_matrix(a, "max_rows");
  const std::size_t n = a.shape()[0], f = a.shape()[1];
  if (n == 0) shape_error("max_rows", a);
  std::vector<std::size_t> arg(f, 0);
  std::vector<double> out(f);
  for (std::size_t j = 0; j < f; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (a.data()[i * f + j] > a.data()[best * f + j]) best = i;
    arg[j] = best;
    out[j] = a.data()[best * f + j];
  }
  return make_op({f}, std::move(out), {a},
                 [a, n, f, arg](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(n * f, 0.0);
                   for (std::size_t j = 0; j < f; ++j)
                     da[arg[j] * f + j] = self.grad[j];
                   axpy_into(a, da);
                 });
}

Tensor gather(const Tensor& a, const std::vector<std::size_t>& idx) {
  require_defined(a, "gather");
  if (a.rank() != 1) shape_error("gather", a);
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= a.size())
      throw std::invalid_argument("gather: index " + std::to_string(idx[i]) +
                                  " out of range for " +
                                  shape_to_string(a.shape()));
    out[i] = a.data()[idx[i]];
  }
  return make_op({idx.size()}, std::move(out), {a},
                 [a, idx](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(a.size(), 0.0);
                   for (std::size_t i = 0; i < idx.size(); ++i)
                     da[idx[i]] += self.grad[i];
                   axpy_into(a, da);
                 });
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx) {
  require_defined(a, "gather_rows");
  require_matrix(a, "gather_rows");
  const std::size_t n = a.shape()[0], f = a.shape()[1];
  std::vector<double> out(idx.size() * f);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= n)
      throw std::invalid_argument("gather_rows: row " + std::to_string(idx[i]) +
                                  " out of range for " +
                                  shape_to_string(a.shape()));
    std::memcpy(out.data() + i * f, a.data() + idx[i] * f, f * sizeof(double));
  }
  return make_op({idx.size(), f}, std::move(out), {a},
                 [a, idx, n, f](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(n * f, 0.0);
                   for (std::size_t i = 0; i < idx.size(); ++i)
                     for (std::size_t j = 0; j < f; ++j)
                       da[idx[i] * f + j] += self.grad[i * f + j];
                   axpy_into(a, da);
                 });
}

Tensor scale_rows(const Tensor& a, const Tensor& s) {
  require_defined(a, "scale_rows");
  require_defined(s, "scale_rows");
  require_matrix(a, "scale_rows");
  if (s.rank() != 1 || s.size() != a.shape()[0]) shape_error("scale_rows", a, s);
  const std::size_t n = a.shape()[0], f = a.shape()[1];
  std::vector<double> out(n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j)
      out[i * f + j] = a.data()[i * f + j] * s.data()[i];
  return make_op(a.shape(), std::move(out), {a, s},
                 [a, s, n, f](detail::Node& self) {
                   if (a.requires_grad()) {
                     std::vector<double> da(n * f);
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < f; ++j)
                         da[i * f + j] = self.grad[i * f + j] * s.data()[i];
                     axpy_into(a, da);
                   }
                   if (s.requires_grad()) {
                     std::vector<double> ds(n, 0.0);
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < f; ++j)
                         ds[i] += self.grad[i * f + j] * a.data()[i * f + j];
                     axpy_into(s, ds);
                   }
                 });
}

Tensor l2_normalize_rows(const Tensor& a) {
  require_defined(a, "l2_normalize_rows");
  require_matrix(a, "l2_normalize_rows");
  const std::size_t n = a.shape()[0], f = a.shape()[1];
  std::vector<double> out(n * f);
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double v = a.data()[i * f + j];
      acc += v * v;
    }
    norms[i] = std::sqrt(acc);
    const double inv = norms[i] > 0.0 ? 1.0 / norms[i] : 0.0;
    for (std::size_t j = 0; j < f; ++j) out[i * f + j] = a.data()[i * f + j] * inv;
  }
  return make_op(a.shape(), std::move(out), {a},
                 [a, n, f, norms](detail::Node& self) {
                   if (!a.requires_grad()) return;
                   std::vector<double> da(n * f, 0.0);
                   for (std::size_t i = 0; i < n; ++i) {
                     if (norms[i] == 0.0) continue;  // zero rows: zero subgradient
                     const double inv = 1.0 / norms[i];
                     const double* y = self.value.data() + i * f;
                     const double* g = self.grad.data() + i * f;
                     double dot = 0.0;
                     for (std::size_t j = 0; j < f; ++j) dot += g[j] * y[j];
                     for (std::size_t j = 0; j < f; ++j)
                       da[i * f + j] = (g[j] - y[j] * dot) * inv;
                   }
                   axpy_into(a, da);
                 });
}

Tensor conv1d(const Tensor& x, const Tensor& kernel, std::size_t stride) {
  require_defined(x, "conv1d");
  require_defined(kernel, "conv1d");
  if (stride == 0) throw std::invalid_argument("conv1d: stride must be >= 1");
  if (x.rank() != kernel.rank() || (x.rank() != 1 && x.rank() != 2))
    shape_error("conv1d", x, kernel);

  const std::size_t c = x.rank() == 2 ? x.shape()[0] : 1;
  const std::size_t l = x.rank() == 2 ? x.shape()[1] : x.shape()[0];
  const std::size_t kc = kernel.rank() == 2 ? kernel.shape()[0] : 1;
  const std::size_t k = kernel.rank() == 2 ? kernel.shape()[1] : kernel.shape()[0];
  if (kc != c) shape_error("conv1d", x, kernel);
  if (k == 0 || k > l)
    throw std::invalid_argument("conv1d: kernel " + shape_to_string(kernel.shape()) +
                                " does not fit input " + shape_to_string(x.shape()));
  const std::size_t lo = (l - k) / stride + 1;

  std::vector<double> out(c * lo, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* xin = x.data() + ch * l;
    const double* kin = kernel.data() + ch * k;
    double* o = out.data() + ch * lo;
    for (std::size_t t = 0; t < lo; ++t) {
      double acc = 0.0;
      const double* seg = xin + t * stride;
      for (std::size_t j = 0; j < k; ++j) acc += seg[j] * kin[j];
      o[t] = acc;
    }
  }
  Shape out_shape = x.rank() == 2 ? Shape{c, lo} : Shape{lo};
  return make_op(std::move(out_shape), std::move(out), {x, kernel},
                 [x, kernel, c, l, k, lo, stride](detail::Node& self) {
                   if (x.requires_grad()) {
                     std::vector<double> dx(c * l, 0.0);
                     for (std::size_t ch = 0; ch < c; ++ch) {
                       const double* kin = kernel.data() + ch * k;
                       const double* g = self.grad.data() + ch * lo;
                       double* d = dx.data() + ch * l;
                       for (std::size_t t = 0; t < lo; ++t)
                         for (std::size_t j = 0; j < k; ++j)
                           d[t * stride + j] += g[t] * kin[j];
                     }
                     axpy_into(x, dx);
                   }
                   if (kernel.requires_grad()) {
                     std::vector<double> dk(c * k, 0.0);
                     for (std::size_t ch = 0; ch < c; ++ch) {
                       const double* xin = x.data() + ch * l;
                       const double* g = self.grad.data() + ch * lo;
                       double* d = dk.data() + ch * k;
                       for (std::size_t t = 0; t < lo; ++t)
                         for (std::size_t j = 0; j < k; ++j)
                           d[j] += g[t] * xin[t * stride + j];
                     }
                     axpy_into(kernel, dk);
                   }
                 });
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  require_defined(logits, "cross_entropy");
  require_matrix(logits, "cross_entropy");
  const std::size_t b = logits.shape()[0], cls = logits.shape()[1];
  if (labels.size() != b)
    throw std::invalid_argument(
        "cross_entropy: " + std::to_string(labels.size()) + " labels for " +
        std::to_string(b) + " logit rows");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= cls)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(cls) + ")");

  // stores softmax probabilities for the backward pass
  std::vector<double> probs(b * cls);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double* in = logits.data() + i * cls;
    double* p = probs.data() + i * cls;
    double mx = in[0];
    for (std::size_t j = 1; j < cls; ++j) mx = std::max(mx, in[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cls; ++j) {
      p[j] = std::exp(in[j] - mx);
      denom += p[j];
    }
    for (std::size_t j = 0; j < cls; ++j) p[j] /= denom;
    total += -std::log(probs[i * cls + static_cast<std::size_t>(labels[i])]);
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  return make_op({1}, {total * inv_b}, {logits},
                 [logits, labels, probs, b, cls, inv_b](detail::Node& self) {
                   if (!logits.requires_grad()) return;
                   const double g = self.grad[0] * inv_b;
                   std::vector<double> dl(b * cls);
                   for (std::size_t i = 0; i < b; ++i)
                     for (std::size_t j = 0; j < cls; ++j) {
                       double v = probs[i * cls + j];
                       if (j == static_cast<std::size_t>(labels[i])) v -= 1.0;
                       dl[i * cls + j] = v * g;
                     }
                   axpy_into(logits, dl);
                 });
}

// ---- batch normalization ----

BatchNorm::BatchNorm(std::size_t features, double momentum, double eps)
    : gamma(Tensor::full({features}, 1.0, true)),
      beta(Tensor::zeros({features}, true)),
      running_mean(Tensor::zeros({features})),
      running_var(Tensor::full({features}, 1.0)),
      momentum_(momentum),
      eps_(eps) {}

Tensor BatchNorm::forward(const Tensor& x, bool training) {
  require_defined(x, "batchnorm");
  require_matrix(x, "batchnorm");
  const std::size_t n = x.shape()[0], f = x.shape()[1];
  if (f != gamma.size())
    throw std::invalid_argument("batchnorm: input " + shape_to_string(x.shape()) +
                                " does not match " + std::to_string(gamma.size()) +
                                " features");
  if (n == 0) throw std::invalid_argument("batchnorm: empty batch");

  if (!training) {
    // affine map from running statistics
    std::vector<double> out(n * f), xhat(n * f);
    std::vector<double> inv_std(f);
    for (std::size_t j = 0; j < f; ++j)
      inv_std[j] = 1.0 / std::sqrt(running_var.data()[j] + eps_);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) {
        xhat[i * f + j] =
            (x.data()[i * f + j] - running_mean.data()[j]) * inv_std[j];
        out[i * f + j] = xhat[i * f + j] * gamma.data()[j] + beta.data()[j];
      }
    Tensor g = gamma, bt = beta;
    return make_op(x.shape(), std::move(out), {x, gamma, beta},
                   [x, g, bt, n, f, inv_std, xhat](detail::Node& self) {
                     if (x.requires_grad()) {
                       std::vector<double> dx(n * f);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t j = 0; j < f; ++j)
                           dx[i * f + j] =
                               self.grad[i * f + j] * g.data()[j] * inv_std[j];
                       axpy_into(x, dx);
                     }
                     if (g.requires_grad() || bt.requires_grad()) {
                       std::vector<double> dg(f, 0.0), db(f, 0.0);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t j = 0; j < f; ++j) {
                           dg[j] += self.grad[i * f + j] * xhat[i * f + j];
                           db[j] += self.grad[i * f + j];
                         }
                       axpy_into(g, dg);
                       axpy_into(bt, db);
                     }
                   });
  }

  std::vector<double> mu(f, 0.0), var(f, 0.0), inv_std(f), xhat(n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) mu[j] += x.data()[i * f + j];
  for (std::size_t j = 0; j < f; ++j) mu[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) {
      const double d = x.data()[i * f + j] - mu[j];
      var[j] += d * d;
    }
  for (std::size_t j = 0; j < f; ++j) {
    var[j] /= static_cast<double>(n);
    inv_std[j] = 1.0 / std::sqrt(var[j] + eps_);
  }
  std::vector<double> out(n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) {
      xhat[i * f + j] = (x.data()[i * f + j] - mu[j]) * inv_std[j];
      out[i * f + j] = xhat[i * f + j] * gamma.data()[j] + beta.data()[j];
    }

  // running statistics update (unbiased variance when n > 1)
  const double m = momentum_;
  for (std::size_t j = 0; j < f; ++j) {
    const double v_unbiased =
        n > 1 ? var[j] * static_cast<double>(n) / static_cast<double>(n - 1)
              : var[j];
    running_mean.data()[j] = (1.0 - m) * running_mean.data()[j] + m * mu[j];
    running_var.data()[j] = (1.0 - m) * running_var.data()[j] + m * v_unbiased;
  }

  Tensor g = gamma, bt = beta;
  return make_op(x.shape(), std::move(out), {x, gamma, beta},
                 [x, g, bt, n, f, inv_std, xhat](detail::Node& self) {
                   const double invn = 1.0 / static_cast<double>(n);
                   if (g.requires_grad() || bt.requires_grad()) {
                     std::vector<double> dg(f, 0.0), db(f, 0.0);
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < f; ++j) {
                         dg[j] += self.grad[i * f + j] * xhat[i * f + j];
                         db[j] += self.grad[i * f + j];
                       }
                     axpy_into(g, dg);
                     axpy_into(bt, db);
                   }
                   if (x.requires_grad()) {
                     std::vector<double> dx(n * f);
                     for (std::size_t j = 0; j < f; ++j) {
                       double sum_dy = 0.0, sum_dy_xhat = 0.0;
                       for (std::size_t i = 0; i < n; ++i) {
                         const double dy = self.grad[i * f + j] * g.data()[j];
                         sum_dy += dy;
                         sum_dy_xhat += dy * xhat[i * f + j];
                       }
                       for (std::size_t i = 0; i < n; ++i) {
                         const double dy = self.grad[i * f + j] * g.data()[j];
                         dx[i * f + j] =
                             inv_std[j] * (dy - sum_dy * invn -
                                           xhat[i * f + j] * sum_dy_xhat * invn);
                       }
                     }
                     axpy_into(x, dx);
                   }
                 });
}

}  // namespace eegraph
