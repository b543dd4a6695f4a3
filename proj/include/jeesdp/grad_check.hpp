// Central-difference gradient checking for tape-built functions.
#ifndef JEESDP_GRAD_CHECK_HPP_
#define JEESDP_GRAD_CHECK_HPP_

#include "jeesdp/tensor.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace jeesdp::ad {

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
Scalar relative_error(Scalar analytic, Scalar numeric) {
  const Scalar denom = std::max({Scalar(1), std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

struct ParamCheckOptions {
  bool negate_analytic = false;  // fault-injection hook for tests
};

// f builds a scalar on the tape from the input variable.
template <typename Scalar>
using InputFunction = std::function<Var<Scalar>(Tape<Scalar>&, const Var<Scalar>&)>;

// Max over coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|).
template <typename Scalar>
Scalar grad_check(const InputFunction<Scalar>& f, const Matrix<Scalar>& x,
                  Scalar eps = Scalar(1e-6), ParamCheckOptions opts = {}) {
  if (!x.allFinite()) throw NonFiniteError("grad_check: non-finite input");
  Tape<Scalar> tape;
  tape.set_negate_gradients(opts.negate_analytic);
  auto xv = make_variable(tape, x);
  auto loss = f(tape, xv);
  if (!std::isfinite(loss.item())) throw NonFiniteError("grad_check: non-finite loss");
  const auto id = xv.id();
  tape.backward(loss, nullptr);
  const Matrix<Scalar> analytic = tape.leaf_gradient(id);

  auto eval = [&](const Matrix<Scalar>& at) {
    Tape<Scalar> t;
    auto v = t.constant(at);
    const Scalar out = f(t, v).item();
    if (!std::isfinite(out)) throw NonFiniteError("grad_check: non-finite loss");
    return out;
  };
  Scalar worst = 0;
  Matrix<Scalar> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar orig = probe.data()[i];
    probe.data()[i] = orig + eps;
    const Scalar up = eval(probe);
    probe.data()[i] = orig - eps;
    const Scalar down = eval(probe);
    probe.data()[i] = orig;
    const Scalar numeric = (up - down) / (Scalar(2) * eps);
    worst = std::max(worst, relative_error(analytic.data()[i], numeric));
  }
  return worst;
}

// f builds a scalar loss from the parameters it reads through the tape.
template <typename Scalar>
using ParamFunction = std::function<Var<Scalar>(Tape<Scalar>&)>;

// Checks d loss / d p for every trainable entry of every parameter in
// `params` (all entries must be finite).
template <typename Scalar>
Scalar grad_check_params(const ParamFunction<Scalar>& f, ParameterSet<Scalar>& params,
                         Scalar eps = Scalar(1e-6), ParamCheckOptions opts = {}) {
  Gradients<Scalar> grads(params);
  {
    Tape<Scalar> tape;
    tape.set_negate_gradients(opts.negate_analytic);
    auto loss = f(tape);
    if (!std::isfinite(loss.item())) throw NonFiniteError("grad_check: non-finite loss");
    tape.backward(loss, &grads);
  }
  auto eval = [&]() {
    Tape<Scalar> t;
    const Scalar out = f(t).item();
    if (!std::isfinite(out)) throw NonFiniteError("grad_check: non-finite loss");
    return out;
  };
  Scalar worst = 0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    if (!p.trainable) continue;
    const Matrix<Scalar> analytic = grads.get(p.id);
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      if (p.row_frozen(r)) continue;
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        const Scalar orig = p.value(r, c);
        p.value(r, c) = orig + eps;
        const Scalar up = eval();
        p.value(r, c) = orig - eps;
        const Scalar down = eval();
        p.value(r, c) = orig;
        const Scalar numeric = (up - down) / (Scalar(2) * eps);
        worst = std::max(worst, relative_error(analytic(r, c), numeric));
      }
    }
  }
  return worst;
}

}  // namespace jeesdp::ad

#endif  // JEESDP_GRAD_CHECK_HPP_
