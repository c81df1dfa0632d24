#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hisnot/types.hpp"

namespace hisnot::ad {

// Raised whenever a forward value or accumulated gradient goes non-finite;
// the message names the offending op.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Op {
  Leaf,
  MatMul,
  Add,
  AddBias,
  Sub,
  Scale,
  Mul,
  Tanh,
  Relu,
  Square,
  Sum,
  Mean,
  RowSqNorm,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::AddBias: return "add_bias";
    case Op::Sub: return "sub";
    case Op::Scale: return "scale";
    case Op::Mul: return "pointwise_mul";
    case Op::Tanh: return "tanh";
    case Op::Relu: return "relu";
    case Op::Square: return "square";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::RowSqNorm: return "rowwise_sqnorm";
  }
  return "?";
}

// Element-wise tanh through one shared code path so tape-based and plain
// forward passes produce bit-identical values.
inline Mat tanh_mat(const Mat& x) { return x.array().tanh().matrix(); }

struct Node {
  Op op = Op::Leaf;
  int a = -1, b = -1;
  double factor = 0.0;  // Scale only
  Mat value;
  Mat grad;  // allocated during backward for requires_grad nodes
  bool requires_grad = false;
};

// Define-by-run tape over dense 2-D tensors. Nodes are appended in forward
// order, so index order is a topological order; backward walks it once in
// reverse with a fixed accumulation sequence.
class Tape {
 public:
  int leaf(Mat value, bool requires_grad) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
  }

  int matmul(int a, int b) {
    const Mat& va = val(a);
    const Mat& vb = val(b);
    if (va.cols() != vb.rows()) throw std::invalid_argument("matmul: inner dims mismatch");
    return binary(Op::MatMul, a, b, va * vb);
  }

  int add(int a, int b) {
    require_same_shape(a, b, "add");
    return binary(Op::Add, a, b, val(a) + val(b));
  }

  // n x c plus a 1 x c bias row replicated over rows (the only broadcast).
  int add_bias(int a, int bias) {
    const Mat& va = val(a);
    const Mat& vb = val(bias);
    if (vb.rows() != 1 || vb.cols() != va.cols())
      throw std::invalid_argument("add_bias: bias must be 1 x cols(a)");
    Mat out = va;
    out.rowwise() += vb.row(0);
    return binary(Op::AddBias, a, bias, std::move(out));
  }

  int sub(int a, int b) {
    require_same_shape(a, b, "sub");
    return binary(Op::Sub, a, b, val(a) - val(b));
  }

  int scale(int a, double factor) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.factor = factor;
    n.value = factor * val(a);
    n.requires_grad = node(a).requires_grad;
    return push(std::move(n));
  }

  int pointwise_mul(int a, int b) {
    require_same_shape(a, b, "pointwise_mul");
    return binary(Op::Mul, a, b, val(a).cwiseProduct(val(b)));
  }

  int tanh(int a) { return unary(Op::Tanh, a, tanh_mat(val(a))); }

  int relu(int a) { return unary(Op::Relu, a, val(a).cwiseMax(0.0)); }

  int square(int a) { return unary(Op::Square, a, val(a).cwiseProduct(val(a))); }

  int sum(int a) {
    Mat out(1, 1);
    out(0, 0) = val(a).sum();
    return unary(Op::Sum, a, std::move(out));
  }

  int mean(int a) {
    Mat out(1, 1);
    out(0, 0) = val(a).mean();
    return unary(Op::Mean, a, std::move(out));
  }

  // n x k -> n x 1 vector of squared row norms.
  int rowwise_sqnorm(int a) {
    return unary(Op::RowSqNorm, a, val(a).rowwise().squaredNorm());
  }

  // Accumulates dLoss/dnode into every requires_grad node reachable from
  // `loss`, which must be a 1x1 tensor.
  void backward(int loss) {
    Node& ln = node(loss);
    if (ln.value.rows() != 1 || ln.value.cols() != 1)
      throw std::invalid_argument("backward: loss must be scalar");
    for (Node& n : nodes_) n.grad.resize(0, 0);
    if (!ln.requires_grad) return;  // no differentiable leaves involved
    ln.grad = Mat::Ones(1, 1);
    for (int i = loss; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (!n.grad.allFinite())
        throw NonFiniteError(std::string("non-finite gradient at op ") + op_name(n.op));
      propagate(n);
    }
  }

  const Mat& value(int i) const { return nodes_.at(i).value; }

  const Mat& grad(int i) const {
    const Node& n = nodes_.at(i);
    if (n.grad.size() == 0) {
      static const Mat empty;
      return empty;
    }
    return n.grad;
  }

  double scalar_value(int i) const {
    const Mat& v = value(i);
    if (v.rows() != 1 || v.cols() != 1) throw std::invalid_argument("scalar_value: not 1x1");
    return v(0, 0);
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;

  Node& node(int i) { return nodes_.at(i); }
  const Node& node(int i) const { return nodes_.at(i); }
  const Mat& val(int i) const { return nodes_.at(i).value; }

  void require_same_shape(int a, int b, const char* what) const {
    if (val(a).rows() != val(b).rows() || val(a).cols() != val(b).cols())
      throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }

  int push(Node n) {
    if (!n.value.allFinite())
      throw NonFiniteError(std::string("non-finite forward value at op ") + op_name(n.op));
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int unary(Op op, int a, Mat value) {
    Node n;
    n.op = op;
    n.a = a;
    n.value = std::move(value);
    n.requires_grad = node(a).requires_grad;
    return push(std::move(n));
  }

  int binary(Op op, int a, int b, Mat value) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.value = std::move(value);
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    return push(std::move(n));
  }

  void accumulate(int target, const Mat& g) {
    Node& t = node(target);
    if (!t.requires_grad) return;
    if (t.grad.size() == 0)
      t.grad = g;
    else
      t.grad += g;
  }

  void propagate(Node& n) {
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        accumulate(n.a, g * val(n.b).transpose());
        accumulate(n.b, val(n.a).transpose() * g);
        break;
      case Op::Add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::AddBias:
        accumulate(n.a, g);
        accumulate(n.b, g.colwise().sum());
        break;
      case Op::Sub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::Scale:
        accumulate(n.a, n.factor * g);
        break;
      case Op::Mul:
        accumulate(n.a, g.cwiseProduct(val(n.b)));
        accumulate(n.b, g.cwiseProduct(val(n.a)));
        break;
      case Op::Tanh:
        accumulate(n.a, g.cwiseProduct(Mat::Ones(n.value.rows(), n.value.cols()) -
                                       n.value.cwiseProduct(n.value)));
        break;
      case Op::Relu: {
        const Mat mask =
            (val(n.a).array() > 0.0).cast<double>().matrix();
        accumulate(n.a, g.cwiseProduct(mask));
        break;
      }
      case Op::Square:
        accumulate(n.a, 2.0 * g.cwiseProduct(val(n.a)));
        break;
      case Op::Sum:
        accumulate(n.a, g(0, 0) * Mat::Ones(val(n.a).rows(), val(n.a).cols()));
        break;
      case Op::Mean:
        accumulate(n.a, (g(0, 0) / val(n.a).size()) *
                            Mat::Ones(val(n.a).rows(), val(n.a).cols()));
        break;
      case Op::RowSqNorm: {
        // d/dA_ij = 2 A_ij g_i
        Mat ga = 2.0 * val(n.a);
        ga.array().colwise() *= g.col(0).array();
        accumulate(n.a, std::move(ga));
        break;
      }
    }
  }
};

// Standard Adam with bias correction; deterministic given call order.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  std::vector<Mat> m, v;
};

inline void adam_step(std::vector<Mat>& params, const std::vector<Mat>& grads, AdamState& s) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: count mismatch");
  if (s.m.empty()) {
    for (const Mat& p : params) {
      s.m.push_back(Mat::Zero(p.rows(), p.cols()));
      s.v.push_back(Mat::Zero(p.rows(), p.cols()));
    }
  }
  if (s.m.size() != params.size()) throw std::invalid_argument("adam_step: state count mismatch");
  ++s.step_count;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step_count));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Mat& g = grads[i];
    if (g.rows() != params[i].rows() || g.cols() != params[i].cols())
      throw std::invalid_argument("adam_step: shape mismatch");
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g.cwiseProduct(g);
    const Mat mhat = s.m[i] / bc1;
    const Mat vhat = s.v[i] / bc2;
    params[i] -=
        s.lr * mhat.cwiseQuotient(vhat.cwiseSqrt() + Mat::Constant(g.rows(), g.cols(), s.eps));
    if (!params[i].allFinite()) throw NonFiniteError("non-finite parameter after adam_step");
  }
}

}  // namespace hisnot::ad
