#include "tag/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tag {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized lazily to data.size()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;  // reads self.grad, accumulates into parents
  const char* op = "leaf";

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

using detail::Node;

namespace {

thread_local bool g_grad_enabled = true;

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using MapCM = Eigen::Map<const EMat>;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  return n;
}

// Result node for an op: records parents and the backward closure only
// when grad mode is on and some input needs gradients.
std::shared_ptr<Node> make_result(const char* op, Shape shape, std::vector<double> data,
                                  std::vector<std::shared_ptr<Node>> parents,
                                  std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->op = op;
  bool need = false;
  if (g_grad_enabled) {
    for (const auto& p : parents)
      if (p->requires_grad) need = true;
  }
  if (need) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

std::int64_t rows_of(const Shape& s) {
  if (s.size() == 1) return 1;
  if (s.size() == 2) return s[0];
  fail("expected 1-D or 2-D tensor, got shape " + shape_str(s));
}

std::int64_t cols_of(const Shape& s) {
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return s[1];
  fail("expected 1-D or 2-D tensor, got shape " + shape_str(s));
}

}  // namespace

struct OpAccess {
  static const std::shared_ptr<Node>& node(const Tensor& t) {
    check(t.defined(), "operation on undefined tensor");
    return t.node_;
  }
  static Tensor wrap(std::shared_ptr<Node> n) { return Tensor(std::move(n)); }
};

static const std::shared_ptr<Node>& N(const Tensor& t) { return OpAccess::node(t); }
static Tensor W(std::shared_ptr<Node> n) { return OpAccess::wrap(std::move(n)); }

// ---- Tensor ----------------------------------------------------------

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream ss;
  ss << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << ",";
    ss << shape[i];
  }
  ss << "]";
  return ss.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = shape_numel(shape);
  check(n >= 0, "negative dimension in shape " + shape_str(shape));
  return W(make_leaf(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto n = shape_numel(shape);
  return W(make_leaf(std::move(shape), std::vector<double>(static_cast<size_t>(n), value), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  check(shape_numel(shape) == static_cast<std::int64_t>(data.size()),
        "data length " + std::to_string(data.size()) + " does not match shape " + shape_str(shape));
  return W(make_leaf(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return N(*this)->shape; }
std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(N(*this)->data.size()); }

std::int64_t Tensor::dim(int i) const {
  const auto& s = shape();
  int nd = static_cast<int>(s.size());
  if (i < 0) i += nd;
  check(i >= 0 && i < nd, "dim index out of range");
  return s[static_cast<size_t>(i)];
}

int Tensor::ndim() const { return static_cast<int>(shape().size()); }

std::span<const double> Tensor::data() const {
  const auto& n = N(*this);
  return {n->data.data(), n->data.size()};
}

std::span<double> Tensor::mutable_data() {
  auto& n = N(*this);
  check(!n->backward_fn, "mutable_data on an interior graph node");
  return {n->data.data(), n->data.size()};
}

bool Tensor::requires_grad() const { return N(*this)->requires_grad; }
bool Tensor::has_grad() const { return !N(*this)->grad.empty(); }

std::span<const double> Tensor::grad() const {
  const auto& n = N(*this);
  check(!n->grad.empty(), "tensor has no gradient; call backward() first");
  return {n->grad.data(), n->grad.size()};
}

void Tensor::zero_grad() {
  auto& n = N(*this);
  if (!n->grad.empty()) std::fill(n->grad.begin(), n->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  const auto& n = N(*this);
  return W(make_leaf(n->shape, n->data, false));
}

double Tensor::item() const {
  check(numel() == 1, "item() requires a single-element tensor, got shape " + shape_str(shape()));
  return N(*this)->data[0];
}

double Tensor::at(std::int64_t i) const {
  const auto& n = N(*this);
  check(i >= 0 && i < static_cast<std::int64_t>(n->data.size()), "flat index out of range");
  return n->data[static_cast<size_t>(i)];
}

bool Tensor::all_finite() const {
  for (double v : N(*this)->data)
    if (!std::isfinite(v)) return false;
  return true;
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }
bool grad_enabled() { return g_grad_enabled; }

// ---- ops -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& an = N(a);
  const auto& bn = N(b);
  check(an->shape.size() == 2 && bn->shape.size() == 2,
        "matmul expects 2-D tensors, got " + shape_str(an->shape) + " and " + shape_str(bn->shape));
  const auto m = an->shape[0], k = an->shape[1], k2 = bn->shape[0], n = bn->shape[1];
  check(k == k2, "matmul inner dimension mismatch: " + shape_str(an->shape) + " x " + shape_str(bn->shape));

  std::vector<double> out(static_cast<size_t>(m * n));
  {
    MapCM A(an->data.data(), m, k);
    MapCM B(bn->data.data(), k, n);
    MapM C(out.data(), m, n);
    C.noalias() = A * B;
  }
  auto ap = an, bp = bn;
  return W(make_result("matmul", {m, n}, std::move(out), {ap, bp}, [ap, bp, m, k, n](Node& self) {
    MapCM dC(self.grad.data(), m, n);
    if (ap->requires_grad) {
      ap->ensure_grad();
      MapCM B(bp->data.data(), k, n);
      MapM dA(ap->grad.data(), m, k);
      dA.noalias() += dC * B.transpose();
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      MapCM A(ap->data.data(), m, k);
      MapM dB(bp->grad.data(), k, n);
      dB.noalias() += A.transpose() * dC;
    }
  }));
}

Tensor transpose(const Tensor& a) {
  const auto& an = N(a);
  check(an->shape.size() == 2, "transpose expects a 2-D tensor, got " + shape_str(an->shape));
  const auto m = an->shape[0], n = an->shape[1];
  std::vector<double> out(static_cast<size_t>(m * n));
  MapCM A(an->data.data(), m, n);
  MapM T(out.data(), n, m);
  T = A.transpose();
  auto ap = an;
  return W(make_result("transpose", {n, m}, std::move(out), {ap}, [ap, m, n](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    MapCM dT(self.grad.data(), n, m);
    MapM dA(ap->grad.data(), m, n);
    dA += dT.transpose();
  }));
}

static void check_same_shape(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b,
                             const char* op) {
  check(a->shape == b->shape, std::string(op) + " shape mismatch: " + shape_str(a->shape) +
                                  " vs " + shape_str(b->shape));
}

Tensor add(const Tensor& a, const Tensor& b) {
  const auto& an = N(a);
  const auto& bn = N(b);
  check_same_shape(an, bn, "add");
  std::vector<double> out(an->data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] + bn->data[i];
  auto ap = an, bp = bn;
  return W(make_result("add", an->shape, std::move(out), {ap, bp}, [ap, bp](Node& self) {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) bp->grad[i] += self.grad[i];
    }
  }));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const auto& an = N(a);
  const auto& bn = N(b);
  check_same_shape(an, bn, "sub");
  std::vector<double> out(an->data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] - bn->data[i];
  auto ap = an, bp = bn;
  return W(make_result("sub", an->shape, std::move(out), {ap, bp}, [ap, bp](Node& self) {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) bp->grad[i] -= self.grad[i];
    }
  }));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const auto& an = N(a);
  const auto& bn = N(b);
  check_same_shape(an, bn, "mul");
  std::vector<double> out(an->data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] * bn->data[i];
  auto ap = an, bp = bn;
  return W(make_result("mul", an->shape, std::move(out), {ap, bp}, [ap, bp](Node& self) {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i] * bp->data[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) bp->grad[i] += self.grad[i] * ap->data[i];
    }
  }));
}

Tensor scale(const Tensor& a, double c) {
  const auto& an = N(a);
  std::vector<double> out(an->data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] * c;
  auto ap = an;
  return W(make_result("scale", an->shape, std::move(out), {ap}, [ap, c](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i] * c;
  }));
}

Tensor add_rowwise(const Tensor& a, const Tensor& bias) {
  const auto& an = N(a);
  const auto& bn = N(bias);
  check(an->shape.size() == 2 && bn->shape.size() == 1 && an->shape[1] == bn->shape[0],
        "add_rowwise expects [m,n]+[n], got " + shape_str(an->shape) + " and " + shape_str(bn->shape));
  const auto m = an->shape[0], n = an->shape[1];
  std::vector<double> out(an->data.size());
  for (std::int64_t r = 0; r < m; ++r)
    for (std::int64_t c = 0; c < n; ++c)
      out[static_cast<size_t>(r * n + c)] = an->data[static_cast<size_t>(r * n + c)] + bn->data[static_cast<size_t>(c)];
  auto ap = an, bp = bn;
  return W(make_result("add_rowwise", an->shape, std::move(out), {ap, bp}, [ap, bp, m, n](Node& self) {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t c = 0; c < n; ++c)
          bp->grad[static_cast<size_t>(c)] += self.grad[static_cast<size_t>(r * n + c)];
    }
  }));
}

Tensor sum(const Tensor& a) {
  const auto& an = N(a);
  double s = 0.0;
  for (double v : an->data) s += v;
  auto ap = an;
  return W(make_result("sum", {1}, {s}, {ap}, [ap](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (size_t i = 0; i < ap->grad.size(); ++i) ap->grad[i] += self.grad[0];
  }));
}

Tensor gelu(const Tensor& a) {
  const auto& an = N(a);
  std::vector<double> out(an->data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double x = an->data[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
  }
  auto ap = an;
  return W(make_result("gelu", an->shape, std::move(out), {ap}, [ap](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    for (size_t i = 0; i < self.grad.size(); ++i) {
      double x = ap->data[i];
      double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
      double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      ap->grad[i] += self.grad[i] * (cdf + x * pdf);
    }
  }));
}

static Tensor softmax_rows(const Tensor& a) {
  const auto& an = N(a);
  const auto m = rows_of(an->shape), n = cols_of(an->shape);
  std::vector<double> out(an->data.size());
  for (std::int64_t r = 0; r < m; ++r) {
    const double* row = an->data.data() + r * n;
    double* orow = out.data() + r * n;
    double mx = row[0];
    for (std::int64_t c = 1; c < n; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    for (std::int64_t c = 0; c < n; ++c) {
      orow[c] = std::exp(row[c] - mx);
      z += orow[c];
    }
    for (std::int64_t c = 0; c < n; ++c) orow[c] /= z;
  }
  auto ap = an;
  auto values = out;  // closure keeps the forward result
  return W(make_result("softmax", an->shape, std::move(out), {ap},
                       [ap, values = std::move(values), m, n](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (std::int64_t r = 0; r < m; ++r) {
      const double* y = values.data() + r * n;
      const double* dy = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::int64_t c = 0; c < n; ++c) dot += y[c] * dy[c];
      double* dx = ap->grad.data() + r * n;
      for (std::int64_t c = 0; c < n; ++c) dx[c] += y[c] * (dy[c] - dot);
    }
  }));
}

Tensor softmax(const Tensor& a, int axis) {
  int nd = a.ndim();
  check(nd == 1 || nd == 2, "softmax expects a 1-D or 2-D tensor");
  if (axis < 0) axis += nd;
  check(axis >= 0 && axis < nd, "softmax axis out of range");
  if (nd == 1 || axis == 1) return softmax_rows(a);
  return transpose(softmax_rows(transpose(a)));
}

Tensor masked_softmax(const Tensor& a, const Tensor& additive_mask) {
  const auto& an = N(a);
  const auto& mn = N(additive_mask);
  check_same_shape(an, mn, "masked_softmax");
  const auto m = rows_of(an->shape), n = cols_of(an->shape);
  // Entries below this are treated as masked out; no arithmetic on -inf.
  constexpr double kMaskedBelow = -1e30;
  std::vector<double> out(an->data.size(), 0.0);
  for (std::int64_t r = 0; r < m; ++r) {
    const double* row = an->data.data() + r * n;
    const double* mask = mn->data.data() + r * n;
    double* orow = out.data() + r * n;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t c = 0; c < n; ++c)
      if (mask[c] > kMaskedBelow) mx = std::max(mx, row[c]);
    if (!std::isfinite(mx)) continue;  // fully masked row -> all zeros
    double z = 0.0;
    for (std::int64_t c = 0; c < n; ++c) {
      if (mask[c] > kMaskedBelow) {
        orow[c] = std::exp(row[c] - mx);
        z += orow[c];
      }
    }
    for (std::int64_t c = 0; c < n; ++c) orow[c] /= z;
  }
  auto ap = an;
  auto values = out;
  return W(make_result("masked_softmax", an->shape, std::move(out), {ap, mn},
                       [ap, values = std::move(values), m, n](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    // Same Jacobian as softmax; masked entries have y == 0 so they
    // neither contribute nor receive gradient.
    for (std::int64_t r = 0; r < m; ++r) {
      const double* y = values.data() + r * n;
      const double* dy = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::int64_t c = 0; c < n; ++c) dot += y[c] * dy[c];
      double* dx = ap->grad.data() + r * n;
      for (std::int64_t c = 0; c < n; ++c) dx[c] += y[c] * (dy[c] - dot);
    }
  }));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  const auto& xn = N(x);
  const auto& gn = N(gain);
  const auto& bn = N(bias);
  const auto m = rows_of(xn->shape), d = cols_of(xn->shape);
  check(d >= 2, "layer_norm requires last dimension >= 2, got " + shape_str(xn->shape));
  check(gn->shape.size() == 1 && gn->shape[0] == d && bn->shape.size() == 1 && bn->shape[0] == d,
        "layer_norm gain/bias must have shape [" + std::to_string(d) + "]");
  constexpr double kEps = 1e-6;

  std::vector<double> out(xn->data.size());
  std::vector<double> norm(xn->data.size());    // pre-affine normalized values
  std::vector<double> inv_std(static_cast<size_t>(m));
  for (std::int64_t r = 0; r < m; ++r) {
    const double* row = xn->data.data() + r * d;
    double mean = 0.0;
    for (std::int64_t c = 0; c < d; ++c) mean += row[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::int64_t c = 0; c < d; ++c) {
      double t = row[c] - mean;
      var += t * t;
    }
    var /= static_cast<double>(d);  // population variance
    double istd = 1.0 / std::sqrt(var + kEps);
    inv_std[static_cast<size_t>(r)] = istd;
    for (std::int64_t c = 0; c < d; ++c) {
      double nv = (row[c] - mean) * istd;
      norm[static_cast<size_t>(r * d + c)] = nv;
      out[static_cast<size_t>(r * d + c)] = nv * gn->data[static_cast<size_t>(c)] + bn->data[static_cast<size_t>(c)];
    }
  }
  auto xp = xn, gp = gn, bp = bn;
  return W(make_result("layer_norm", xn->shape, std::move(out), {xp, gp, bp},
                       [xp, gp, bp, norm = std::move(norm), inv_std = std::move(inv_std), m, d](Node& self) {
    for (std::int64_t r = 0; r < m; ++r) {
      const double* nrow = norm.data() + r * d;
      const double* dy = self.grad.data() + r * d;
      if (gp->requires_grad) {
        gp->ensure_grad();
        for (std::int64_t c = 0; c < d; ++c) gp->grad[static_cast<size_t>(c)] += dy[c] * nrow[c];
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t c = 0; c < d; ++c) bp->grad[static_cast<size_t>(c)] += dy[c];
      }
      if (xp->requires_grad) {
        xp->ensure_grad();
        double istd = inv_std[static_cast<size_t>(r)];
        double mean_h = 0.0, mean_hn = 0.0;
        for (std::int64_t c = 0; c < d; ++c) {
          double h = dy[c] * gp->data[static_cast<size_t>(c)];
          mean_h += h;
          mean_hn += h * nrow[c];
        }
        mean_h /= static_cast<double>(d);
        mean_hn /= static_cast<double>(d);
        double* dx = xp->grad.data() + r * d;
        for (std::int64_t c = 0; c < d; ++c) {
          double h = dy[c] * gp->data[static_cast<size_t>(c)];
          dx[c] += (h - mean_h - nrow[c] * mean_hn) * istd;
        }
      }
    }
  }));
}

Tensor slice_rows(const Tensor& a, std::int64_t begin, std::int64_t end) {
  const auto& an = N(a);
  check(an->shape.size() == 2, "slice_rows expects a 2-D tensor");
  const auto m = an->shape[0], n = an->shape[1];
  check(0 <= begin && begin <= end && end <= m,
        "slice_rows range [" + std::to_string(begin) + "," + std::to_string(end) + ") out of bounds for " +
            shape_str(an->shape));
  std::vector<double> out(static_cast<size_t>((end - begin) * n));
  std::copy(an->data.begin() + begin * n, an->data.begin() + end * n, out.begin());
  auto ap = an;
  return W(make_result("slice_rows", {end - begin, n}, std::move(out), {ap}, [ap, begin, n](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      ap->grad[static_cast<size_t>(begin * n) + i] += self.grad[i];
  }));
}

Tensor slice_cols(const Tensor& a, std::int64_t begin, std::int64_t end) {
  const auto& an = N(a);
  check(an->shape.size() == 2, "slice_cols expects a 2-D tensor");
  const auto m = an->shape[0], n = an->shape[1];
  check(0 <= begin && begin <= end && end <= n,
        "slice_cols range [" + std::to_string(begin) + "," + std::to_string(end) + ") out of bounds for " +
            shape_str(an->shape));
  const auto w = end - begin;
  std::vector<double> out(static_cast<size_t>(m * w));
  for (std::int64_t r = 0; r < m; ++r)
    std::copy(an->data.begin() + r * n + begin, an->data.begin() + r * n + end, out.begin() + r * w);
  auto ap = an;
  return W(make_result("slice_cols", {m, w}, std::move(out), {ap}, [ap, begin, m, n, w](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (std::int64_t r = 0; r < m; ++r)
      for (std::int64_t c = 0; c < w; ++c)
        ap->grad[static_cast<size_t>(r * n + begin + c)] += self.grad[static_cast<size_t>(r * w + c)];
  }));
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  check(!parts.empty(), "concat_rows of zero tensors");
  std::int64_t n = N(parts[0])->shape.size() == 2 ? N(parts[0])->shape[1] : -1;
  check(n > 0, "concat_rows expects 2-D tensors");
  std::int64_t m = 0;
  std::vector<std::shared_ptr<Node>> nodes;
  for (const auto& t : parts) {
    const auto& tn = N(t);
    check(tn->shape.size() == 2 && tn->shape[1] == n,
          "concat_rows column mismatch: " + shape_str(tn->shape));
    m += tn->shape[0];
    nodes.push_back(tn);
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m * n));
  for (const auto& tn : nodes) out.insert(out.end(), tn->data.begin(), tn->data.end());
  auto nodes_copy = nodes;
  return W(make_result("concat_rows", {m, n}, std::move(out), std::move(nodes),
                       [nodes = std::move(nodes_copy)](Node& self) {
    size_t off = 0;
    for (const auto& tn : nodes) {
      if (tn->requires_grad) {
        tn->ensure_grad();
        for (size_t i = 0; i < tn->data.size(); ++i) tn->grad[i] += self.grad[off + i];
      }
      off += tn->data.size();
    }
  }));
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  check(!parts.empty(), "concat_cols of zero tensors");
  check(N(parts[0])->shape.size() == 2, "concat_cols expects 2-D tensors");
  const auto m = N(parts[0])->shape[0];
  std::int64_t n = 0;
  std::vector<std::shared_ptr<Node>> nodes;
  std::vector<std::int64_t> widths;
  for (const auto& t : parts) {
    const auto& tn = N(t);
    check(tn->shape.size() == 2 && tn->shape[0] == m, "concat_cols row mismatch: " + shape_str(tn->shape));
    n += tn->shape[1];
    widths.push_back(tn->shape[1]);
    nodes.push_back(tn);
  }
  std::vector<double> out(static_cast<size_t>(m * n));
  for (std::int64_t r = 0; r < m; ++r) {
    std::int64_t c0 = 0;
    for (size_t p = 0; p < nodes.size(); ++p) {
      const auto w = widths[p];
      std::copy(nodes[p]->data.begin() + r * w, nodes[p]->data.begin() + (r + 1) * w,
                out.begin() + r * n + c0);
      c0 += w;
    }
  }
  auto nodes_copy = nodes;
  return W(make_result("concat_cols", {m, n}, std::move(out), std::move(nodes),
                       [nodes = std::move(nodes_copy), widths, m, n](Node& self) {
    std::int64_t c0 = 0;
    for (size_t p = 0; p < nodes.size(); ++p) {
      const auto w = widths[p];
      if (nodes[p]->requires_grad) {
        nodes[p]->ensure_grad();
        for (std::int64_t r = 0; r < m; ++r)
          for (std::int64_t c = 0; c < w; ++c)
            nodes[p]->grad[static_cast<size_t>(r * w + c)] += self.grad[static_cast<size_t>(r * n + c0 + c)];
      }
      c0 += w;
    }
  }));
}

Tensor gather_rows(const Tensor& table, const std::vector<std::int64_t>& indices) {
  const auto& tn = N(table);
  check(tn->shape.size() == 2, "gather_rows expects a 2-D table");
  const auto v = tn->shape[0], d = tn->shape[1];
  std::vector<double> out(indices.size() * static_cast<size_t>(d));
  for (size_t i = 0; i < indices.size(); ++i) {
    auto idx = indices[i];
    check(idx >= 0 && idx < v, "gather_rows index " + std::to_string(idx) + " out of range [0," +
                                   std::to_string(v) + ")");
    std::copy(tn->data.begin() + idx * d, tn->data.begin() + (idx + 1) * d,
              out.begin() + static_cast<std::int64_t>(i) * d);
  }
  auto tp = tn;
  auto idxs = indices;
  return W(make_result("gather_rows", {static_cast<std::int64_t>(indices.size()), d}, std::move(out),
                       {tp}, [tp, idxs = std::move(idxs), d](Node& self) {
    if (!tp->requires_grad) return;
    tp->ensure_grad();
    for (size_t i = 0; i < idxs.size(); ++i)
      for (std::int64_t c = 0; c < d; ++c)
        tp->grad[static_cast<size_t>(idxs[i] * d + c)] += self.grad[i * static_cast<size_t>(d) + static_cast<size_t>(c)];
  }));
}

Tensor dropout(const Tensor& a, double p, Rng& rng, bool training) {
  if (!training || p <= 0.0) return a;
  check(p < 1.0, "dropout probability must be < 1");
  const auto& an = N(a);
  const double keep = 1.0 - p;
  std::vector<double> mask(an->data.size());
  for (auto& mv : mask) mv = (rng.uniform() < keep) ? 1.0 / keep : 0.0;
  std::vector<double> out(an->data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] * mask[i];
  auto ap = an;
  return W(make_result("dropout", an->shape, std::move(out), {ap},
                       [ap, mask = std::move(mask)](Node& self) {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i] * mask[i];
  }));
}

Tensor bce_with_logits_mean(const Tensor& logits, const std::vector<double>& targets,
                            const std::vector<double>& valid) {
  const auto& ln = N(logits);
  check(ln->data.size() == targets.size() && ln->data.size() == valid.size(),
        "bce_with_logits_mean length mismatch");
  double count = 0.0;
  for (double v : valid)
    if (v != 0.0) count += 1.0;
  check(count > 0.0, "bce_with_logits_mean with no valid entries");
  double total = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (valid[i] == 0.0) continue;
    double z = ln->data[i], y = targets[i];
    total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  auto lp = ln;
  return W(make_result("bce_with_logits_mean", {1}, {total / count}, {lp},
                       [lp, targets, valid, count](Node& self) {
    if (!lp->requires_grad) return;
    lp->ensure_grad();
    const double g = self.grad[0] / count;
    for (size_t i = 0; i < targets.size(); ++i) {
      if (valid[i] == 0.0) continue;
      double z = lp->data[i];
      double sig = 1.0 / (1.0 + std::exp(-z));
      lp->grad[i] += g * (sig - targets[i]);
    }
  }));
}

// ---- backward --------------------------------------------------------

void backward(const Tensor& loss) {
  const auto& root = N(loss);
  check(root->data.size() == 1,
        "backward requires a scalar loss, got shape " + shape_str(root->shape));
  if (!root->requires_grad) return;

  // Iterative post-order DFS; graphs are DAGs by construction.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& fr = stack.back();
    if (fr.next_parent < fr.node->parents.size()) {
      Node* p = fr.node->parents[fr.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(fr.node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn) {
      node->ensure_grad();
      node->backward_fn(*node);
    }
  }
}

}  // namespace tag
