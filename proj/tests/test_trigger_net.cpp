#include "doctest.h"
#include "jeesdp/trigger_net.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace jeesdp;

namespace {

void zero_all(Params& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].value.setZero();
}

}  // namespace

TEST_CASE("bilstm with zero weights and zero input") {
  Params ps;
  std::mt19937_64 rng(1);
  const auto p = make_bilstm(ps, 3, 2, rng);
  zero_all(ps);
  Tape t;
  CHECK(bilstm_forward(t, p, t.constant(Matrixd::Zero(5, 3)), 5).value().isZero());
}

TEST_CASE("bilstm matches the direct recurrence") {
  std::mt19937_64 rng(7);
  for (int real : {4, 1, 3}) {
    Params ps;
    const auto p = make_bilstm(ps, 3, 2, rng);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i].value = ad::uniform_matrix<Scalar>(ps[i].value.rows(), ps[i].value.cols(), 0.8, rng);
    }
    const Matrixd x = ad::uniform_matrix<Scalar>(4, 3, 1.0, rng);
    Tape t;
    const auto got = bilstm_forward(t, p, t.constant(x), real).value();
    const Eigen::MatrixXd xr = x.topRows(real);
    const auto fwd = oracle::lstm(xr, p.forward.input_weight->value, p.forward.hidden_weight->value,
                                  p.forward.bias->value, false);
    const auto bwd = oracle::lstm(xr, p.backward.input_weight->value, p.backward.hidden_weight->value,
                                  p.backward.bias->value, true);
    CHECK((got.topLeftCorner(real, 2) - fwd).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((got.block(0, 2, real, 2) - bwd).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(got.bottomRows(4 - real).isZero());
    if (real == 1) {
      // One step in each direction from the same input row.
      CHECK((got.block(0, 0, 1, 2) - fwd).norm() < 1e-12);
      CHECK((got.block(0, 2, 1, 2) - bwd).norm() < 1e-12);
    }
  }
}

TEST_CASE("trigger head output distribution") {
  const auto vocab = LabelVocab::ace2005();
  const int labels = static_cast<int>(vocab.bio_labels().size());
  CHECK(labels == 67);
  Params ps;
  std::mt19937_64 rng(3);
  const auto p = make_trigger_head(ps, 8, 16, labels, rng);
  Tape t;
  const auto random_input = t.constant(ad::uniform_matrix<Scalar>(5, 8, 3.0, rng));
  const auto probs = trigger_output(t, p, random_input, 0.0, false).value();
  CHECK(probs.cols() == 67);
  for (int r = 0; r < 5; ++r) CHECK(std::abs(probs.row(r).sum() - 1.0) < 1e-12);

  zero_all(ps);
  Tape t2;
  const auto uniform = trigger_output(t2, p, t2.constant(random_input.value()), 0.0, false).value();
  CHECK((uniform.array() - 1.0 / 67.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("trigger candidates") {
  auto s = normalize_length(testing::running_example(), 50);
  const auto vocab = build_vocab({s});
  const int labels = static_cast<int>(vocab.bio_labels().size());
  Matrixd probs = Matrixd::Zero(50, labels);
  probs.col(0).setOnes();

  SUBCASE("all O yields nothing") {
    CHECK(extract_trigger_candidates(probs, s, vocab, CandidateMode::kPredicted).triggers.empty());
  }
  SUBCASE("gold mode returns the three annotated triggers") {
    const auto c = extract_trigger_candidates(probs, s, vocab, CandidateMode::kGold);
    REQUIRE(c.triggers.size() == 3);
    CHECK(s.tokens[static_cast<std::size_t>(c.triggers[0].span.start)].text == "leaved");
    CHECK(s.tokens[static_cast<std::size_t>(c.triggers[1].span.start)].text == "talks");
    CHECK(s.tokens[static_cast<std::size_t>(c.triggers[2].span.start)].text == "summit");
    CHECK(c.subtypes[1] == *vocab.subtype_index("Meet"));
  }
  SUBCASE("B then I decodes one span") {
    const int meet = *vocab.subtype_index("Meet");
    probs(1, 0) = 0.0;
    probs(1, vocab.begin_label(meet)) = 2.0;
    probs(2, 0) = 0.0;
    probs(2, vocab.inside_label(meet)) = 2.0;
    const auto c = extract_trigger_candidates(probs, s, vocab, CandidateMode::kPredicted);
    REQUIRE(c.triggers.size() == 1);
    CHECK(c.triggers[0].span == Span{1, 3});
    CHECK(c.triggers[0].subtype == "Meet");
  }
  SUBCASE("ties resolve to the first label") {
    Matrixd flat = Matrixd::Constant(50, labels, 0.5);
    const auto a = argmax_labels(flat, 20);
    CHECK(std::all_of(a.begin(), a.end(), [](int l) { return l == 0; }));
  }
}
