// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// Every value is a rank-2 row-major matrix; vectors are 1 x n rows and
// scalars are 1 x 1. A Tape records primitive operations as they execute and
// replays their adjoints in reverse order on backward().
#ifndef JEESDP_TENSOR_HPP_
#define JEESDP_TENSOR_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace jeesdp::ad {

template <typename Scalar>
using Matrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrixd = Matrix<double>;

struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(Shape s) {
  return "[" + std::to_string(s.rows) + ", " + std::to_string(s.cols) + "]";
}

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
[[noreturn]] inline void shape_error(const std::string& op, Shape a, Shape b) {
  throw ShapeError(op + ": shape mismatch " + to_string(a) + " vs " +
                   to_string(b));
}
[[noreturn]] inline void shape_error(const std::string& op, Shape a,
                                     const std::string& why) {
  throw ShapeError(op + ": invalid input " + to_string(a) + " (" + why + ")");
}
}  // namespace detail

// A named trainable matrix. `frozen_rows` are never touched by gradients or
// the optimizer (the PAD row of an embedding table).
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  bool trainable = true;
  bool is_bias = false;
  std::vector<Eigen::Index> frozen_rows;
  std::size_t id = 0;

  Shape shape() const { return {value.rows(), value.cols()}; }
  bool row_frozen(Eigen::Index r) const {
    return std::find(frozen_rows.begin(), frozen_rows.end(), r) !=
           frozen_rows.end();
  }
};

// Owns parameters in creation order; names are unique.
template <typename Scalar>
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter<Scalar>& add(std::string name, Matrix<Scalar> value,
                         bool is_bias = false) {
    if (index_.count(name) != 0) {
      throw std::invalid_argument("duplicate parameter name: " + name);
    }
    auto p = std::make_unique<Parameter<Scalar>>();
    p->name = std::move(name);
    p->value = std::move(value);
    p->is_bias = is_bias;
    p->id = params_.size();
    index_[p->name] = p->id;
    params_.push_back(std::move(p));
    return *params_.back();
  }

  std::size_t size() const { return params_.size(); }
  Parameter<Scalar>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<Scalar>& operator[](std::size_t i) const {
    return *params_[i];
  }
  Parameter<Scalar>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter<Scalar>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

 private:
  std::vector<std::unique_ptr<Parameter<Scalar>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Gradient buffers indexed by parameter id, allocated on first touch.
template <typename Scalar>
class Gradients {
 public:
  explicit Gradients(const ParameterSet<Scalar>& params)
      : params_(&params), grads_(params.size()) {}

  Matrix<Scalar>& at(std::size_t id) {
    auto& g = grads_.at(id);
    if (g.size() == 0) {
      const auto& p = (*params_)[id];
      g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    }
    return g;
  }
  bool touched(std::size_t id) const { return grads_.at(id).size() != 0; }
  // Zero-filled view for untouched parameters.
  Matrix<Scalar> get(std::size_t id) const {
    if (touched(id)) return grads_[id];
    const auto& p = (*params_)[id];
    return Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
  }
  void clear() {
    for (auto& g : grads_) g.resize(0, 0);
  }
  void accumulate(const Gradients& other) {
    for (std::size_t i = 0; i < grads_.size(); ++i) {
      if (other.touched(i)) at(i) += other.grads_[i];
    }
  }
  std::size_t size() const { return grads_.size(); }

 private:
  const ParameterSet<Scalar>* params_;
  std::vector<Matrix<Scalar>> grads_;
};

template <typename Scalar>
class Tape;

// Handle to a value recorded on a tape.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, std::size_t id, std::uint64_t generation)
      : tape_(tape), id_(id), generation_(generation) {}

  const Matrix<Scalar>& value() const;
  Shape shape() const {
    const auto& v = value();
    return {v.rows(), v.cols()};
  }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar item() const {
    const auto& v = value();
    if (v.size() != 1) detail::shape_error("item", shape(), "not a scalar");
    return v(0, 0);
  }
  Tape<Scalar>* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  std::uint64_t generation() const { return generation_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape<Scalar>* tape_ = nullptr;
  std::size_t id_ = 0;
  std::uint64_t generation_ = 0;
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  // Adjoint callback: receives the tape and the output node's gradient.
  using Backward = std::function<void(Tape&, const Mat&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(Mat value) { return push(std::move(value), false, Backward{}); }

  // A leaf that requires grad but is not a parameter (grad_check inputs).
  Var<Scalar> variable(Mat value) { return push(std::move(value), true, Backward{}); }

  // Leaf bound to a parameter; one node per parameter per tape.
  Var<Scalar> param(const Parameter<Scalar>& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return handle(it->second);
    auto v = push(p.value, p.trainable, Backward{});
    param_nodes_[&p] = v.id();
    param_leaves_.push_back({v.id(), &p});
    return v;
  }

  // Records a node whose value was computed by the caller.
  Var<Scalar> record(Mat value, std::initializer_list<Var<Scalar>> inputs,
                     Backward backward) {
    bool needs = false;
    for (const auto& in : inputs) {
      check_live(in);
      needs = needs || nodes_[in.id()].requires_grad;
    }
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{});
  }
  Var<Scalar> record(Mat value, const std::vector<Var<Scalar>>& inputs,
                     Backward backward) {
    bool needs = false;
    for (const auto& in : inputs) {
      check_live(in);
      needs = needs || nodes_[in.id()].requires_grad;
    }
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{});
  }

  const Mat& value(const Var<Scalar>& v) const {
    check_live(v);
    return nodes_[v.id()].value;
  }
  bool requires_grad(const Var<Scalar>& v) const {
    check_live(v);
    return nodes_[v.id()].requires_grad;
  }

  // Adds `g` into the adjoint of `v` (no-op for nodes without grad).
  template <typename Derived>
  void accumulate(const Var<Scalar>& v, const Eigen::MatrixBase<Derived>& g) {
    auto& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  // Sparse path used by embedding lookups: gradients go straight into the
  // sink instead of a dense adjoint for the whole table.
  Gradients<Scalar>* sink() const { return sink_; }
  Scalar gradient_sign() const { return negate_ ? Scalar(-1) : Scalar(1); }

  // Test hook: flips the sign of every gradient delivered to leaves.
  void set_negate_gradients(bool on) { negate_ = on; }

  // Gradient of a leaf created with variable(); valid after backward until
  // the next forward.
  const Mat& leaf_gradient(std::size_t id) const { return leaf_grads_.at(id); }

  // Runs the adjoint sweep from a scalar loss. Parameter gradients are added
  // into `grads`; leaf variable gradients are kept for leaf_gradient().
  // The tape is cleared afterwards.
  void backward(const Var<Scalar>& loss, Gradients<Scalar>* grads) {
    if (loss.tape() != this || loss.generation() != generation_ ||
        loss.id() >= nodes_.size()) {
      throw std::logic_error(
          "backward: loss is not on the current tape (backward already run?)");
    }
    const auto& lv = nodes_[loss.id()].value;
    if (lv.size() != 1) {
      detail::shape_error("backward", Shape{lv.rows(), lv.cols()},
                          "loss must be a scalar");
    }
    sink_ = grads;
    leaf_grads_.clear();
    accumulate(loss, Mat::Constant(1, 1, Scalar(1)));
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backward) {
        Mat g = std::move(n.grad);
        n.backward(*this, g);
      }
    }
    const Scalar sign = gradient_sign();
    for (const auto& [id, p] : param_leaves_) {
      auto& n = nodes_[id];
      if (!p->trainable || grads == nullptr || n.grad.size() == 0) continue;
      auto& dst = grads->at(p->id);
      if (p->frozen_rows.empty()) {
        dst += sign * n.grad;
      } else {
        for (Eigen::Index r = 0; r < n.grad.rows(); ++r) {
          if (!p->row_frozen(r)) dst.row(r) += sign * n.grad.row(r);
        }
      }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto& n = nodes_[i];
      if (n.is_variable) {
        leaf_grads_[i] = n.grad.size() == 0
                             ? Mat::Zero(n.value.rows(), n.value.cols())
                             : Mat(sign * n.grad);
      }
    }
    clear();
  }

  void clear() {
    nodes_.clear();
    param_nodes_.clear();
    param_leaves_.clear();
    sink_ = nullptr;
    ++generation_;
  }

  std::size_t size() const { return nodes_.size(); }

  // Stream of uniform draws for dropout; seeded per tape by the caller.
  std::mt19937_64& rng() { return rng_; }
  void seed(std::uint64_t s) { rng_.seed(s); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    bool is_variable = false;
    Backward backward;
  };

  Var<Scalar> handle(std::size_t id) { return Var<Scalar>(this, id, generation_); }

  Var<Scalar> push(Mat value, bool requires_grad, Backward backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return handle(nodes_.size() - 1);
  }

  void check_live(const Var<Scalar>& v) const {
    if (v.tape() != this || v.generation() != generation_ ||
        v.id() >= nodes_.size()) {
      throw std::logic_error("stale or foreign tensor handle");
    }
  }

  std::vector<Node> nodes_;
  std::map<const Parameter<Scalar>*, std::size_t> param_nodes_;
  std::vector<std::pair<std::size_t, const Parameter<Scalar>*>> param_leaves_;
  std::map<std::size_t, Mat> leaf_grads_;
  Gradients<Scalar>* sink_ = nullptr;
  std::uint64_t generation_ = 1;
  bool negate_ = false;
  std::mt19937_64 rng_{0};

 public:
  // Marks a node created by variable() so its gradient is retained.
  void mark_variable(const Var<Scalar>& v) { nodes_[v.id()].is_variable = true; }
};

template <typename Scalar>
const Matrix<Scalar>& Var<Scalar>::value() const {
  if (tape_ == nullptr) throw std::logic_error("empty tensor handle");
  return tape_->value(*this);
}

// Leaf whose gradient is retained for inspection after backward().
template <typename Scalar>
Var<Scalar> make_variable(Tape<Scalar>& tape, Matrix<Scalar> value) {
  auto v = tape.variable(std::move(value));
  tape.mark_variable(v);
  return v;
}

// Uniform double in [0, 1) from 53 random bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Scalar>
Matrix<Scalar> uniform_matrix(Eigen::Index rows, Eigen::Index cols,
                              Scalar bound, std::mt19937_64& rng) {
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * bound);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Primitives

namespace detail {

enum class Broadcast { kSame, kRow, kCol, kScalar };

template <typename Scalar>
Broadcast broadcast_kind(const std::string& op, const Matrix<Scalar>& a,
                         const Matrix<Scalar>& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::kCol;
  shape_error(op, Shape{a.rows(), a.cols()}, Shape{b.rows(), b.cols()});
}

// Reduces a full-shape gradient to the broadcast operand's shape.
template <typename Scalar>
Matrix<Scalar> reduce_to(Broadcast kind, const Matrix<Scalar>& g) {
  switch (kind) {
    case Broadcast::kSame:
      return g;
    case Broadcast::kRow:
      return g.colwise().sum();
    case Broadcast::kCol:
      return g.rowwise().sum();
    case Broadcast::kScalar:
      return Matrix<Scalar>::Constant(1, 1, g.sum());
  }
  return g;
}

template <typename Scalar>
Matrix<Scalar> expand(Broadcast kind, const Matrix<Scalar>& b,
                      Eigen::Index rows, Eigen::Index cols) {
  switch (kind) {
    case Broadcast::kSame:
      return b;
    case Broadcast::kRow:
      return b.replicate(rows, 1);
    case Broadcast::kCol:
      return b.replicate(1, cols);
    case Broadcast::kScalar:
      return Matrix<Scalar>::Constant(rows, cols, b(0, 0));
  }
  return b;
}

template <typename Scalar>
Tape<Scalar>& tape_of(const Var<Scalar>& a) {
  if (!a.valid()) throw std::logic_error("empty tensor handle");
  return *a.tape();
}

template <typename Scalar>
Tape<Scalar>& tape_of(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.tape() != b.tape()) throw std::logic_error("tensors on different tapes");
  return tape_of(a);
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& t = detail::tape_of(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.rows()) detail::shape_error("matmul", a.shape(), b.shape());
  Matrix<Scalar> out = av * bv;
  return t.record(std::move(out), {a, b}, [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * b.value().transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, a.value().transpose() * g);
  });
}

// a + b, with b broadcast over rows, columns, or as a scalar.
template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& t = detail::tape_of(a, b);
  const auto& av = a.value();
  const auto kind = detail::broadcast_kind("add", av, b.value());
  Matrix<Scalar> out = av + detail::expand(kind, b.value(), av.rows(), av.cols());
  return t.record(std::move(out), {a, b}, [a, b, kind](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, detail::reduce_to(kind, g));
  });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& t = detail::tape_of(a, b);
  const auto& av = a.value();
  const auto kind = detail::broadcast_kind("sub", av, b.value());
  Matrix<Scalar> out = av - detail::expand(kind, b.value(), av.rows(), av.cols());
  return t.record(std::move(out), {a, b}, [a, b, kind](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, -detail::reduce_to(kind, g));
  });
}

// Elementwise product with the same broadcasting rules as add().
template <typename Scalar>
Var<Scalar> mul(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& t = detail::tape_of(a, b);
  const auto& av = a.value();
  const auto kind = detail::broadcast_kind("elementwise_mul", av, b.value());
  Matrix<Scalar> bx = detail::expand(kind, b.value(), av.rows(), av.cols());
  Matrix<Scalar> out = av.cwiseProduct(bx);
  return t.record(std::move(out), {a, b}, [a, b, kind](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    const auto& av = a.value();
    if (tp.requires_grad(a)) {
      tp.accumulate(a, g.cwiseProduct(detail::expand(kind, b.value(), av.rows(), av.cols())));
    }
    if (tp.requires_grad(b)) {
      tp.accumulate(b, detail::reduce_to<Scalar>(kind, g.cwiseProduct(av)));
    }
  });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar s) {
  auto& t = detail::tape_of(a);
  return t.record(a.value() * s, {a}, [a, s](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(a, g * s);
  });
}

namespace detail {
template <typename Scalar, typename F, typename DF>
Var<Scalar> unary(const Var<Scalar>& a, F f, DF df) {
  auto& t = tape_of(a);
  Matrix<Scalar> out = a.value().unaryExpr(f);
  return t.record(out, {a}, [a, out, df](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    Matrix<Scalar> d(out.rows(), out.cols());
    const auto& x = a.value();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      d.data()[i] = df(x.data()[i], out.data()[i]);
    }
    tp.accumulate(a, g.cwiseProduct(d));
  });
}
}  // namespace detail

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return x > Scalar(0) ? x : Scalar(0); },
      [](Scalar x, Scalar) { return x > Scalar(0) ? Scalar(1) : Scalar(0); });
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  return detail::unary(
      a,
      [](Scalar x) {
        if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
        const Scalar e = std::exp(x);
        return e / (Scalar(1) + e);
      },
      [](Scalar, Scalar y) { return y * (Scalar(1) - y); });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return std::tanh(x); },
      [](Scalar, Scalar y) { return Scalar(1) - y * y; });
}

template <typename Scalar>
Var<Scalar> exp(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return std::exp(x); }, [](Scalar, Scalar y) { return y; });
}

// Natural log with inputs clamped from below at `floor`; clamped entries get
// zero gradient.
template <typename Scalar>
Var<Scalar> log(const Var<Scalar>& a, Scalar floor = Scalar(1e-12)) {
  return detail::unary(
      a, [floor](Scalar x) { return std::log(std::max(x, floor)); },
      [floor](Scalar x, Scalar) { return x > floor ? Scalar(1) / x : Scalar(0); });
}

// Row-wise softmax (the last axis).
template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar>& a) {
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  Matrix<Scalar> y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return t.record(y, {a}, [a, y](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    Matrix<Scalar> d(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const Scalar dot = g.row(r).dot(y.row(r));
      d.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    tp.accumulate(a, d);
  });
}

enum class Axis { kAll, kRows, kCols };

// kRows sums down each column (result 1 x C); kCols sums each row (R x 1).
template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a, Axis axis = Axis::kAll) {
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  Matrix<Scalar> out;
  switch (axis) {
    case Axis::kAll:
      out = Matrix<Scalar>::Constant(1, 1, x.sum());
      break;
    case Axis::kRows:
      out = x.colwise().sum();
      break;
    case Axis::kCols:
      out = x.rowwise().sum();
      break;
  }
  return t.record(std::move(out), {a}, [a, axis, rows, cols](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    switch (axis) {
      case Axis::kAll:
        tp.accumulate(a, Matrix<Scalar>::Constant(rows, cols, g(0, 0)));
        break;
      case Axis::kRows:
        tp.accumulate(a, g.replicate(rows, 1));
        break;
      case Axis::kCols:
        tp.accumulate(a, g.replicate(1, cols));
        break;
    }
  });
}

// Concatenation along columns (the last axis).
template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_last_axis: no inputs");
  auto& t = detail::tape_of(parts.front());
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.tape() != &t) throw std::logic_error("tensors on different tapes");
    if (p.rows() != rows) {
      detail::shape_error("concat_last_axis", parts.front().shape(), p.shape());
    }
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  std::vector<Eigen::Index> offsets;
  for (const auto& p : parts) {
    offsets.push_back(at);
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return t.record(std::move(out), parts, [parts, offsets](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (tp.requires_grad(parts[i])) {
        tp.accumulate(parts[i], g.middleCols(offsets[i], parts[i].cols()));
      }
    }
  });
}

template <typename Scalar>
Var<Scalar> concat_rows(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  auto& t = detail::tape_of(parts.front());
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.tape() != &t) throw std::logic_error("tensors on different tapes");
    if (p.cols() != cols) {
      detail::shape_error("concat_rows", parts.front().shape(), p.shape());
    }
    rows += p.rows();
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  std::vector<Eigen::Index> offsets;
  for (const auto& p : parts) {
    offsets.push_back(at);
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return t.record(std::move(out), parts, [parts, offsets](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (tp.requires_grad(parts[i])) {
        tp.accumulate(parts[i], g.middleRows(offsets[i], parts[i].rows()));
      }
    }
  });
}

template <typename Scalar>
Var<Scalar> slice_rows(const Var<Scalar>& a, Eigen::Index begin, Eigen::Index count) {
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  if (begin < 0 || count < 0 || begin + count > x.rows()) {
    detail::shape_error("slice_rows", a.shape(), "range out of bounds");
  }
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  return t.record(x.middleRows(begin, count), {a},
                  [a, begin, count, rows, cols](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Matrix<Scalar> d = Matrix<Scalar>::Zero(rows, cols);
                    d.middleRows(begin, count) = g;
                    tp.accumulate(a, d);
                  });
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar>& a, Eigen::Index begin, Eigen::Index count) {
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  if (begin < 0 || count < 0 || begin + count > x.cols()) {
    detail::shape_error("slice_cols", a.shape(), "range out of bounds");
  }
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  return t.record(x.middleCols(begin, count), {a},
                  [a, begin, count, rows, cols](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    Matrix<Scalar> d = Matrix<Scalar>::Zero(rows, cols);
                    d.middleCols(begin, count) = g;
                    tp.accumulate(a, d);
                  });
}

// Half-open row range [begin, end).
struct Segment {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
};

// For each segment, the column-wise max over its rows (result S x C). Ties
// route the gradient to the first maximal row.
template <typename Scalar>
Var<Scalar> max_over_segments(const Var<Scalar>& a, const std::vector<Segment>& segments) {
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  const auto n = static_cast<Eigen::Index>(segments.size());
  Matrix<Scalar> out(n, x.cols());
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(n * x.cols()));
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [b, e] = segments[static_cast<std::size_t>(s)];
    if (b < 0 || e > x.rows() || b > e) {
      detail::shape_error("max_over_segment", a.shape(), "segment out of range");
    }
    if (b == e) detail::shape_error("max_over_segment", a.shape(), "empty segment");
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Eigen::Index best = b;
      for (Eigen::Index r = b + 1; r < e; ++r) {
        if (x(r, c) > x(best, c)) best = r;
      }
      out(s, c) = x(best, c);
      argmax[static_cast<std::size_t>(s * x.cols() + c)] = best;
    }
  }
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  return t.record(std::move(out), {a}, [a, argmax, n, rows, cols](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    Matrix<Scalar> d = Matrix<Scalar>::Zero(rows, cols);
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        d(argmax[static_cast<std::size_t>(s * cols + c)], c) += g(s, c);
      }
    }
    tp.accumulate(a, d);
  });
}

// Gathers rows of a parameter table. Gradients are scattered directly into
// the backward sink, skipping frozen rows.
template <typename Scalar>
Var<Scalar> embedding_lookup(Tape<Scalar>& t, const Parameter<Scalar>& table,
                             const std::vector<Eigen::Index>& indices) {
  const auto& w = table.value;
  Matrix<Scalar> out(static_cast<Eigen::Index>(indices.size()), w.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto r = indices[i];
    if (r < 0 || r >= w.rows()) {
      detail::shape_error("embedding_lookup", table.shape(),
                          "index " + std::to_string(r) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = w.row(r);
  }
  if (!table.trainable) return t.constant(std::move(out));
  const Parameter<Scalar>* p = &table;
  auto anchor = t.variable(Matrix<Scalar>::Zero(0, 0));
  return t.record(std::move(out), {anchor}, [p, indices](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    auto* sink = tp.sink();
    if (sink == nullptr) return;
    auto& dst = sink->at(p->id);
    const Scalar sign = tp.gradient_sign();
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (p->row_frozen(indices[i])) continue;
      dst.row(indices[i]) += sign * g.row(static_cast<Eigen::Index>(i));
    }
  });
}

// Inverted dropout: at train time each element is zeroed with probability
// `rate` and survivors are scaled by 1 / (1 - rate). Identity at eval time.
template <typename Scalar>
Var<Scalar> dropout(const Var<Scalar>& a, Scalar rate, bool train) {
  if (!train || rate <= Scalar(0)) return a;
  if (rate >= Scalar(1)) throw std::invalid_argument("dropout: rate must be < 1");
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  Matrix<Scalar> keep(x.rows(), x.cols());
  const Scalar s = Scalar(1) / (Scalar(1) - rate);
  for (Eigen::Index i = 0; i < keep.size(); ++i) {
    keep.data()[i] = uniform01(t.rng()) >= static_cast<double>(rate) ? s : Scalar(0);
  }
  Matrix<Scalar> out = x.cwiseProduct(keep);
  return t.record(std::move(out), {a}, [a, keep](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(a, g.cwiseProduct(keep));
  });
}

// out(r, 0) = a(r, cols[r]).
template <typename Scalar>
Var<Scalar> pick(const Var<Scalar>& a, const std::vector<Eigen::Index>& cols) {
  auto& t = detail::tape_of(a);
  const auto& x = a.value();
  if (static_cast<Eigen::Index>(cols.size()) != x.rows()) {
    detail::shape_error("pick", a.shape(), "one column index per row required");
  }
  Matrix<Scalar> out(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto c = cols[static_cast<std::size_t>(r)];
    if (c < 0 || c >= x.cols()) detail::shape_error("pick", a.shape(), "column out of range");
    out(r, 0) = x(r, c);
  }
  const Eigen::Index rows = x.rows();
  const Eigen::Index ncols = x.cols();
  return t.record(std::move(out), {a}, [a, cols, rows, ncols](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    Matrix<Scalar> d = Matrix<Scalar>::Zero(rows, ncols);
    for (Eigen::Index r = 0; r < rows; ++r) d(r, cols[static_cast<std::size_t>(r)]) = g(r, 0);
    tp.accumulate(a, d);
  });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) { return add(a, b); }
template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) { return sub(a, b); }
template <typename Scalar>
Var<Scalar> operator*(const Var<Scalar>& a, const Var<Scalar>& b) { return matmul(a, b); }

}  // namespace jeesdp::ad

#endif  // JEESDP_TENSOR_HPP_
