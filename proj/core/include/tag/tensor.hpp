#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tag/rng.hpp"

namespace tag {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct Node;
}

// Dense 64-bit float tensor with reverse-mode automatic differentiation.
// A Tensor is a value-semantic handle to a shared node in the
// computation graph. Data is row-major and immutable once produced by an
// op; the only sanctioned mutations are gradient accumulation during
// backward() and in-place parameter updates between training steps.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::int64_t numel() const;
  std::int64_t dim(int i) const;  // negative i counts from the back
  int ndim() const;

  std::span<const double> data() const;
  // Parameter updates only; must not be called on interior graph nodes.
  std::span<double> mutable_data();

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // New leaf sharing this tensor's values, cut out of the graph.
  Tensor detach() const;

  double item() const;  // requires numel() == 1
  double at(std::int64_t flat_index) const;

  bool all_finite() const;

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct OpAccess;
};

// RAII guard disabling graph recording; forwards run value-only.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool grad_enabled();

// ---- ops -------------------------------------------------------------
// All ops are deterministic and operate on finite inputs. Shape errors
// throw std::runtime_error with both shapes in the message.

Tensor matmul(const Tensor& a, const Tensor& b);       // [m,k]x[k,n] -> [m,n]
Tensor transpose(const Tensor& a);                     // 2-D
Tensor add(const Tensor& a, const Tensor& b);          // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);          // Hadamard
Tensor scale(const Tensor& a, double c);
Tensor add_rowwise(const Tensor& a, const Tensor& bias);  // [m,n]+[n]
Tensor sum(const Tensor& a);                           // -> [1]
Tensor gelu(const Tensor& a);                          // exact erf form

// Softmax along `axis` (0 or 1 for 2-D tensors, -1 = last). Computed
// with max-subtraction; each slice sums to 1.
Tensor softmax(const Tensor& a, int axis = -1);

// Row-wise softmax under an additive {0, -inf} mask of the same shape.
// Masked entries get probability 0; fully masked rows come out as all
// zeros rather than NaN.
Tensor masked_softmax(const Tensor& a, const Tensor& additive_mask);

// Per-row normalization over the last axis, epsilon 1e-6 inside the
// square root, then affine with gain/bias of length d.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

Tensor slice_rows(const Tensor& a, std::int64_t begin, std::int64_t end);
Tensor slice_cols(const Tensor& a, std::int64_t begin, std::int64_t end);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

// Gathers rows of `table` at `indices`; gradients scatter-add back, so
// repeated indices accumulate.
Tensor gather_rows(const Tensor& table, const std::vector<std::int64_t>& indices);

// Inverted dropout. Identity when `training` is false or p == 0.
Tensor dropout(const Tensor& a, double p, Rng& rng, bool training);

// Mean element-wise sigmoid BCE between logits and {0,1} targets over
// entries where valid != 0. Numerically stable log1p form.
Tensor bce_with_logits_mean(const Tensor& logits, const std::vector<double>& targets,
                            const std::vector<double>& valid);

// Populates .grad on every requires_grad tensor reachable from `loss`.
// `loss` must be scalar and the graph acyclic. Grads accumulate; call
// zero_grad between steps.
void backward(const Tensor& loss);

}  // namespace tag
