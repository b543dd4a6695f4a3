#include <random>

#include "doctest.h"
#include "jeesdp/argument_net.hpp"
#include "jeesdp/grad_check.hpp"
#include "jeesdp/tensor.hpp"

using namespace jeesdp;

namespace {

Matrixd row(std::initializer_list<double> v) {
  Matrixd m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

Matrixd input_gradient(const ad::InputFunction<Scalar>& f, const Matrixd& x) {
  Tape t;
  auto v = t.variable(x);
  t.mark_variable(v);
  auto loss = f(t, v);
  t.backward(loss, nullptr);
  return t.leaf_gradient(v.id());
}

}  // namespace

TEST_CASE("elementwise and reduction ops") {
  Tape t;
  CHECK(ad::relu(t.constant(row({-1, 0, 2}))).value() == row({0, 0, 2}));
  const auto s = ad::softmax_rows(t.constant(row({0, 0}))).value();
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(0, 1) == doctest::Approx(0.5));
  Matrixd col(5, 1);
  col << 3, 1, 4, 1, 5;
  const auto m = ad::max_over_segments(t.constant(col), {{0, 2}, {2, 5}}).value();
  CHECK(m(0, 0) == 3);
  CHECK(m(1, 0) == 5);
}

TEST_CASE("max_over_segments agrees with a direct scan") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrixd x = ad::uniform_matrix<Scalar>(9, 4, 1.0, rng);
    const int cut1 = std::uniform_int_distribution<int>(1, 7)(rng);
    const int cut2 = std::uniform_int_distribution<int>(cut1 + 1, 8)(rng);
    const std::vector<ad::Segment> segs = {{0, cut1}, {cut1, cut2}, {cut2, 9}};
    Tape t;
    const auto got = ad::max_over_segments(t.constant(x), segs).value();
    for (std::size_t s = 0; s < segs.size(); ++s) {
      for (int c = 0; c < 4; ++c) {
        double best = x(segs[s].begin, c);
        for (auto r = segs[s].begin; r < segs[s].end; ++r) best = std::max(best, x(r, c));
        CHECK(got(static_cast<Eigen::Index>(s), c) == best);
      }
    }
  }
}

TEST_CASE("softmax rows sum to one") {
  std::mt19937_64 rng(4);
  Tape t;
  const auto p = ad::softmax_rows(t.constant(ad::uniform_matrix<Scalar>(7, 67, 30.0, rng))).value();
  for (int r = 0; r < 7; ++r) CHECK(std::abs(p.row(r).sum() - 1.0) < 1e-12);
}

TEST_CASE("hand-derived gradients") {
  const auto g1 = input_gradient([](Tape&, const Var& x) { return ad::sum(x); }, row({0.3, -2, 5}));
  CHECK(g1 == row({1, 1, 1}));
  const auto g2 = input_gradient([](Tape&, const Var& x) { return ad::sum(ad::mul(x, x)); }, row({2, -3}));
  CHECK(g2 == row({4, -6}));
}

TEST_CASE("gradients accumulate in the sink and skip frozen rows") {
  Params ps;
  auto& table = ps.add("table", Matrixd::Ones(3, 2));
  table.frozen_rows = {0};
  Grads grads(ps);
  Tape t;
  auto looked = ad::embedding_lookup(t, table, {0, 2, 2});
  t.backward(ad::sum(looked), &grads);
  const auto g = grads.get(table.id);
  CHECK(g.row(0).isZero());
  CHECK(g.row(1).isZero());
  CHECK(g(2, 0) == 2.0);
}

TEST_CASE("shape errors carry the operation name") {
  Tape t;
  auto a = t.constant(Matrixd::Ones(2, 3));
  auto b = t.constant(Matrixd::Ones(2, 3));
  CHECK_THROWS_WITH_AS(ad::matmul(a, b), doctest::Contains("matmul"), ad::ShapeError);
  CHECK_THROWS_AS(ad::concat_cols<Scalar>({a, t.constant(Matrixd::Ones(3, 1))}), ad::ShapeError);
}

TEST_CASE("backward twice on one loss is rejected") {
  Tape t;
  auto x = t.variable(Matrixd::Ones(1, 1));
  auto loss = ad::sum(x);
  t.backward(loss, nullptr);
  CHECK_THROWS_AS(t.backward(loss, nullptr), std::logic_error);
}

TEST_CASE("grad_check examples") {
  std::mt19937_64 rng(6);
  const Matrixd x = ad::uniform_matrix<Scalar>(3, 4, 2.0, rng);
  CHECK(ad::grad_check<Scalar>([](Tape&, const Var& v) { return ad::sum(ad::mul(v, v)); }, x) < 1e-8);
  CHECK(ad::grad_check<Scalar>([](Tape& t, const Var&) { return t.constant(Matrixd::Constant(1, 1, 3.0)); }, x) ==
        0.0);
  // A flipped backward is caught.
  CHECK(ad::grad_check<Scalar>([](Tape&, const Var& v) { return ad::sum(ad::mul(v, v)); }, x, 1e-6,
                               {true}) > 1e-1);
}

TEST_CASE("gate, graph layer and attention stack on three arguments") {
  std::mt19937_64 rng(9);
  Params ps;
  const auto p = make_gcn_sdp(ps, 4, 2, 0.5, rng);
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].value = ad::uniform_matrix<Scalar>(ps[i].value.rows(), ps[i].value.cols(), 0.7, rng);
  IntMatrix m(3, 3);
  m << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const auto adjacency = decompose_sdp_l<Scalar>(m, 2);
  const Matrixd x = ad::uniform_matrix<Scalar>(3, 4, 1.0, rng);
  const Matrixd w = ad::uniform_matrix<Scalar>(3, 4, 1.0, rng);
  auto f = [&](Tape& t, const Var& v) {
    auto r = gcn_sdp_forward(t, p, adjacency, v, true);
    return ad::sum(ad::mul(r.aggregated, t.constant(w)));
  };
  CHECK(ad::grad_check<Scalar>(f, x) < 1e-5);
  CHECK(ad::grad_check_params<Scalar>([&](Tape& t) { return f(t, t.constant(x)); }, ps) < 1e-5);
}

TEST_CASE("dropout is identity at inference and seeded in training") {
  Tape t;
  auto x = t.constant(Matrixd::Ones(4, 50));
  CHECK(ad::dropout(x, 0.5, false).value() == x.value());
  t.seed(42);
  const Matrixd a = ad::dropout(x, 0.5, true).value();
  t.seed(42);
  const Matrixd b = ad::dropout(x, 0.5, true).value();
  CHECK(a == b);
  // Inverted dropout: survivors are scaled by 1 / (1 - rate).
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK((a(i) == 0.0 || a(i) == 2.0));
}
