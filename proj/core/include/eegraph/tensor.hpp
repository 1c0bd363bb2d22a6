#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace eegraph {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& s);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  std::vector<double> grad;  // sized lazily; empty means "no grad yet"
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // accumulates into parents' grad

  std::size_t size() const { return value.size(); }
  std::vector<double>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor of 64-bit floats participating in reverse-mode
/// differentiation. Copies are shallow handles onto the same node, so a
/// Tensor is cheap to pass by value. Values are immutable once a tensor has
/// been consumed by an operation; only parameter updates (Adam) and grad
/// buffers mutate in place.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double fill, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor identity(std::size_t n);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t extent(std::size_t axis) const;
  bool is_scalar() const { return defined() && size() == 1; }

  const double* data() const;
  double* data();
  const std::vector<double>& values() const;

  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j, std::size_t k) const;

  bool requires_grad() const;
  void set_requires_grad(bool rg);

  bool has_grad() const;
  const std::vector<double>& grad() const;  // throws if no grad populated
  std::vector<double>& grad_buffer();       // creates zero buffer on demand
  void zero_grad();

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_op(Shape shape, std::vector<double> value,
                        const std::vector<Tensor>& inputs,
                        std::function<void(detail::Node&)> backprop);
};

/// Records a new graph node. `backprop` reads self.grad and accumulates into
/// the captured inputs; it is dropped when no input requires grad or a
/// NoGradGuard is active.
Tensor make_op(Shape shape, std::vector<double> value,
               const std::vector<Tensor>& inputs,
               std::function<void(detail::Node&)> backprop);

/// Reverse-mode sweep from a scalar loss. Gradients accumulate additively
/// into every reachable requires_grad tensor; call zero_grad between steps.
void backward(const Tensor& loss);

/// While any guard is alive no computation graph is recorded (evaluation mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};
bool autograd_enabled();

// ---- differentiable primitives ----

Tensor matmul(const Tensor& a, const Tensor& b);
/// Elementwise addition; the single allowed broadcast is (m,n) + (n),
/// adding a bias vector onto every row. Anything else is a shape error.
Tensor add(const Tensor& a, const Tensor& b);
/// Adds a scalar (size-1) tensor to every element.
Tensor add_scalar(const Tensor& a, const Tensor& s);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& a, double c);       // by compile-time constant
Tensor scale_by(const Tensor& a, const Tensor& s);  // by scalar tensor
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor abs(const Tensor& a);  // subgradient 0 at 0
/// Softmax along the last axis (per row for matrices).
Tensor softmax(const Tensor& a);

/// Concatenate along `axis`: 1-D tensors along 0, or matrices along 0/1.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Stack equal-length vectors as the rows of a matrix.
Tensor stack_rows(const std::vector<Tensor>& rows);
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);  // 2-D

Tensor sum(const Tensor& a);   // all elements -> scalar
Tensor mean(const Tensor& a);  // all elements -> scalar
Tensor max(const Tensor& a);   // all elements -> scalar; ties -> lowest index
Tensor sum_rows(const Tensor& a);   // (n,f) -> (f), column-wise
Tensor mean_rows(const Tensor& a);  // (n,f) -> (f)
Tensor max_rows(const Tensor& a);   // (n,f) -> (f); ties -> lowest row

Tensor gather(const Tensor& a, const std::vector<std::size_t>& idx);       // 1-D
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx);  // 2-D
/// Scales row i of `a` by s[i].
Tensor scale_rows(const Tensor& a, const Tensor& s);
/// Rows rescaled to unit L2 norm; all-zero rows stay zero.
Tensor l2_normalize_rows(const Tensor& a);

/// 1-D convolution with stride. For a (c,l) input and (c,k) kernel bank the
/// convolution runs depthwise: row i of the input against row i of the bank.
Tensor conv1d(const Tensor& x, const Tensor& kernel, std::size_t stride);

/// Mean negative log-likelihood of softmax(logits) at the given labels.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels);

/// Batch normalization over rows: each column is a feature. Running
/// statistics feed eval mode; gamma/beta are the learnable affine pair.
class BatchNorm {
 public:
  BatchNorm(std::size_t features, double momentum = 0.1, double eps = 1e-12);

  Tensor forward(const Tensor& x, bool training);

  Tensor gamma;         // (f), init 1
  Tensor beta;          // (f), init 0
  Tensor running_mean;  // (f), state, not learnable
  Tensor running_var;   // (f), state, not learnable

  double momentum() const { return momentum_; }
  double eps() const { return eps_; }

 private:
  double momentum_;
  double eps_;
};

}  // namespace eegraph
