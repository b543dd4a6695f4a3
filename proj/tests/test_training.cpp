#include <cmath>

#include "doctest.h"
#include "jeesdp/grad_check.hpp"
#include "jeesdp/synthetic.hpp"
#include "jeesdp/training.hpp"
#include "support.hpp"

using namespace jeesdp;

namespace {

Matrixd one_hot_rows(const std::vector<Eigen::Index>& gold, Eigen::Index classes) {
  Matrixd m = Matrixd::Zero(static_cast<Eigen::Index>(gold.size()), classes);
  for (std::size_t r = 0; r < gold.size(); ++r) m(static_cast<Eigen::Index>(r), gold[r]) = 1.0;
  return m;
}

void scramble(Params& ps, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& p = ps[i];
    p.value = ad::uniform_matrix<Scalar>(p.value.rows(), p.value.cols(), 0.5, rng);
    for (auto r : p.frozen_rows) p.value.row(r).setZero();
  }
}

// "Smith attacked Jones and died Monday": two events, three entities.
Sentence six_token_sentence() {
  Sentence s;
  s.id = "six";
  s.tokens = {{"Smith", "NNP", 1, "nsubj"}, {"attacked", "VBD", kRootHead, "root"}, {"Jones", "NNP", 1, "dobj"},
              {"and", "CC", 4, "cc"},       {"died", "VBD", 1, "conj"},            {"Monday", "NNP", 4, "nmod"}};
  s.entities = {{"e0", {0, 1}, "Person"}, {"e1", {2, 3}, "Person"}, {"e2", {5, 6}, "Time"}};
  s.triggers = {{{1, 2}, "Attack"}, {{4, 5}, "Die"}};
  s.arguments = {{0, "e0", "Agent"}, {0, "e1", "Target"}, {1, "e1", "Target"}, {1, "e2", "Time"}};
  return s;
}

Corpus fixture() { return synthetic_corpus(); }

}  // namespace

TEST_CASE("joint loss terms") {
  Tape t;
  SUBCASE("uniform trigger distribution over 67 labels") {
    auto probs = t.constant(Matrixd::Constant(1, 67, 1.0 / 67));
    const double loss = joint_loss(probs, {5}, Var(), {}).item();
    CHECK(loss == doctest::Approx(std::log(67.0)).epsilon(1e-12));
  }
  SUBCASE("perfect predictions cost nothing") {
    const std::vector<Eigen::Index> gold = {0, 3, 1};
    const std::vector<Eigen::Index> roles = {2, 0};
    auto trig = t.constant(one_hot_rows(gold, 5));
    auto role = t.constant(one_hot_rows(roles, 4));
    CHECK(joint_loss(trig, gold, role, roles).item() == 0.0);
  }
  SUBCASE("terms add without interacting") {
    const std::vector<Eigen::Index> gold = {1, 0};
    const std::vector<Eigen::Index> roles = {2};
    Matrixd tp(2, 3);
    tp << 0.2, 0.7, 0.1, 0.6, 0.3, 0.1;
    Matrixd rp(1, 3);
    rp << 0.3, 0.3, 0.4;
    Matrixd rp_worse = rp;
    rp_worse(0, 2) = 0.4 * 0.4;  // -log q doubles
    rp_worse(0, 0) = 1.0 - 0.3 - 0.16;
    auto trig = t.constant(tp);
    const double trig_only = joint_loss(trig, gold, Var(), {}).item();
    const double base = joint_loss(trig, gold, t.constant(rp), roles).item();
    const double worse = joint_loss(trig, gold, t.constant(rp_worse), roles).item();
    const double role_term = -std::log(0.4);
    CHECK(base - trig_only == doctest::Approx(role_term).epsilon(1e-12));
    CHECK(worse - trig_only == doctest::Approx(2.0 * role_term).epsilon(1e-12));
  }
  SUBCASE("zero gold probability is clamped") {
    auto probs = t.constant(Matrixd::Zero(1, 3));
    CHECK(joint_loss(probs, {0}, Var(), {}).item() == doctest::Approx(-std::log(1e-12)));
  }
}

TEST_CASE("l2 penalty covers trainable non-bias weights") {
  Params ps;
  ps.add("w", Matrixd::Constant(2, 2, 0.5));
  ps.add("b", Matrixd::Constant(1, 2, 3.0), true);
  auto& frozen = ps.add("f", Matrixd::Constant(1, 1, 7.0));
  frozen.trainable = false;
  CHECK(l2_penalty(ps, 0.1) == doctest::Approx(0.1));

  Tape t;
  auto probs = t.constant(one_hot_rows({0}, 2));
  const double loss = joint_loss(probs, {0}, Var(), {}, &ps, 0.1).item();
  CHECK(loss > 0.0);
  CHECK(loss == doctest::Approx(0.1));

  Grads g(ps);
  add_l2_gradient(ps, 0.1, g);
  CHECK(g.get(0) == Matrixd::Constant(2, 2, 0.1));
  CHECK(g.get(1).isZero());
  CHECK(g.get(2).isZero());
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters alone") {
    Params ps;
    ps.add("x", Matrixd::Constant(2, 3, 1.5));
    Adam adam(ps, 0.1);
    Grads g(ps);
    g.at(0);
    adam.step(ps, g);
    CHECK(ps[0].value == Matrixd::Constant(2, 3, 1.5));
  }
  SUBCASE("first step of a constant unit gradient") {
    Params ps;
    ps.add("x", Matrixd::Zero(1, 1));
    Adam adam(ps, 0.1);
    Grads g(ps);
    g.at(0)(0, 0) = 1.0;
    adam.step(ps, g);
    // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
    CHECK(ps[0].value(0, 0) == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-15));
  }
  SUBCASE("quadratic bowl") {
    Params ps;
    ps.add("x", Matrixd::Constant(1, 1, 1.0));
    Adam adam(ps, 0.1);
    for (int step = 0; step < 200; ++step) {
      Grads g(ps);
      g.at(0) = 2.0 * ps[0].value;
      adam.step(ps, g);
    }
    CHECK(std::abs(ps[0].value(0, 0)) < 1e-3);
  }
  SUBCASE("frozen rows and untrainable parameters are untouched") {
    Params ps;
    auto& table = ps.add("table", Matrixd::Ones(3, 2));
    table.frozen_rows = {0};
    auto& fixed = ps.add("fixed", Matrixd::Ones(1, 1));
    fixed.trainable = false;
    Adam adam(ps, 0.1);
    Grads g(ps);
    g.at(0).setOnes();
    g.at(1).setOnes();
    adam.step(ps, g);
    CHECK(table.value.row(0) == Matrixd::Ones(1, 2));
    CHECK(table.value(1, 0) < 1.0);
    CHECK(fixed.value(0, 0) == 1.0);
  }
  SUBCASE("non-finite gradient names the parameter") {
    Params ps;
    ps.add("alpha", Matrixd::Ones(1, 1));
    ps.add("beta", Matrixd::Ones(1, 1));
    Adam adam(ps, 0.1);
    Grads g(ps);
    g.at(0)(0, 0) = 1.0;
    g.at(1)(0, 0) = std::nan("");
    CHECK_THROWS_WITH_AS(adam.step(ps, g), doctest::Contains("'beta'"), NumericError);
    CHECK(ps[0].value(0, 0) == 1.0);
  }
}

TEST_CASE("end-to-end gradient on a six-token micro-model") {
  const auto s = six_token_sentence();
  validate_sentence(s, nullptr);
  TrainConfig cfg;
  cfg.max_length = 6;
  cfg.use_contextual = false;
  cfg.word_dim = 4;
  cfg.pos_dim = 3;
  cfg.dep_dim = 3;
  cfg.entity_dim = 2;
  cfg.position_dim = 2;
  cfg.sdp_length_dim = 2;
  cfg.argument_type_dim = 2;
  cfg.lstm_hidden = 2;
  cfg.trigger_hidden = 4;
  cfg.filters = 2;
  cfg.max_sdp_length = 3;
  cfg.role_hidden = 4;
  cfg.identification_hidden = 4;
  cfg.identification_head = true;
  cfg.dropout = 0.0;
  cfg.l2 = 1e-3;
  Model model(cfg, build_vocab({s}), vocabulary_from_corpus({s}, cfg.word_dim));
  std::mt19937_64 rng(21);
  scramble(model.params(), rng);
  const auto enc = model.encode(s, nullptr);
  CHECK(enc.num_entities() == 3);
  CHECK(enc.num_triggers() == 2);
  const auto counts = count_targets({&enc});
  const double err = ad::grad_check_params<Scalar>(
      [&](Tape& t) { return ad::add(sentence_loss(t, model, enc, counts, false).total, l2_term(t, model.params(), cfg.l2)); },
      model.params());
  CHECK(err < 1e-5);
}

TEST_CASE("a zero head weight removes that head's gradient") {
  const auto corpus = fixture();
  auto cfg = testing::micro_config();
  Model model(cfg, build_vocab(corpus), vocabulary_from_corpus(corpus, cfg.word_dim));
  const auto enc = model.encode(corpus[1], nullptr);
  REQUIRE(enc.num_triggers() > 0);
  const auto counts = count_targets({&enc});

  Grads muted(model.params());
  {
    Tape t;
    t.backward(sentence_loss(t, model, enc, counts, false, {1.0, 0.0, 0.0}).total, &muted);
  }
  Grads trigger_only(model.params());
  {
    Tape t;
    const auto trig = model.trigger_forward(t, enc, false);
    const int n = enc.real_length();
    std::vector<Eigen::Index> gold(enc.gold_bio.begin(), enc.gold_bio.begin() + n);
    auto loss = ad::scale(cross_entropy_sum(ad::slice_rows(trig.probs, 0, n), gold), 1.0 / n);
    t.backward(loss, &trigger_only);
  }
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    const auto& p = model.params()[i];
    INFO(p.name);
    CHECK((muted.get(i) - trigger_only.get(i)).cwiseAbs().maxCoeff() < 1e-15);
    if (p.name.rfind("role_", 0) == 0 || p.name.rfind("dmcnn", 0) == 0) CHECK(muted.get(i).isZero());
  }
}

TEST_CASE("argument stage without the path mask sees every real token") {
  const auto s = testing::running_example();
  auto cfg = testing::micro_config();
  const auto vocab = build_vocab({s});
  const auto words = vocabulary_from_corpus({s}, cfg.word_dim);
  Model with_mask(cfg, vocab, words);
  cfg.sdp_mask = false;
  Model without(cfg, vocab, words);
  const auto enc = with_mask.encode(s, nullptr);
  const int L = cfg.max_length;
  IntMatrix all_real = IntMatrix::Zero(enc.num_entities(), L);
  all_real.leftCols(enc.real_length()).setOnes();

  Tape t;
  const auto trig = with_mask.trigger_forward(t, enc, false);
  const auto span = enc.sentence.triggers[2].span;
  const auto plain = without.argument_forward(t, enc, trig, span, enc.gold_sdp.sdp[2], enc.gold_sdp.sdp_len.row(2),
                                              false);
  const auto forced = with_mask.argument_forward(t, enc, trig, span, all_real, enc.gold_sdp.sdp_len.row(2), false);
  const auto masked = with_mask.argument_forward(t, enc, trig, span, enc.gold_sdp.sdp[2],
                                                 enc.gold_sdp.sdp_len.row(2), false);
  CHECK(plain.features.value() == forced.features.value());
  CHECK(plain.features.value() != masked.features.value());
}

TEST_CASE("zero-initialised model predicts no events") {
  const auto s = testing::running_example();
  auto cfg = testing::micro_config();
  Model model(cfg, build_vocab({s}), vocabulary_from_corpus({s}, cfg.word_dim));
  for (std::size_t i = 0; i < model.params().size(); ++i) model.params()[i].value.setZero();
  const auto enc = model.encode(s, nullptr);
  Tape t;
  const auto probs = model.trigger_forward(t, enc, false).probs.value();
  CHECK((probs.topRows(enc.real_length()).array() - 1.0 / probs.cols()).abs().maxCoeff() < 1e-15);
  const auto pred = model.predict(enc);
  CHECK(pred.triggers.empty());
  CHECK(pred.arguments.empty());
}

TEST_CASE("sentence without entities") {
  auto s = six_token_sentence();
  s.entities.clear();
  s.arguments.clear();
  auto cfg = testing::micro_config();
  cfg.max_length = 6;
  const auto vocab = build_vocab({six_token_sentence()});
  Model model(cfg, vocab, vocabulary_from_corpus({s}, cfg.word_dim));
  for (std::size_t i = 0; i < model.params().size(); ++i) model.params()[i].value.setZero();
  // Bias the trigger head towards B-Attack everywhere.
  model.params().find("trigger_b2")->value(0, vocab.begin_label(*vocab.subtype_index("Attack"))) = 5.0;
  const auto enc = model.encode(s, nullptr);
  const auto pred = model.predict(enc);
  CHECK(pred.triggers.size() == 6);
  CHECK(pred.arguments.empty());

  Tape t;
  const auto loss = sentence_loss(t, model, enc, count_targets({&enc}), false);
  CHECK(loss.total.valid());
  CHECK(loss.role == 0.0);
}

TEST_CASE("one sentence is memorised") {
  const auto corpus = fixture();
  const Corpus one = {corpus[3]};
  REQUIRE(one[0].triggers.size() >= 1);
  auto cfg = testing::micro_config();
  cfg.epochs = 120;
  cfg.patience = 120;
  auto result = train(one, {}, cfg, build_vocab(corpus), vocabulary_from_corpus(one, cfg.word_dim));
  double lowest = 1e9;
  double early = 0.0;
  double late = 0.0;
  const auto& h = result.history;
  for (std::size_t e = 0; e < h.size(); ++e) {
    lowest = std::min(lowest, h[e].selection_loss);
    if (e < 10) early += h[e].selection_loss;
    if (e + 10 >= h.size()) late += h[e].selection_loss;
  }
  CHECK(late < early);
  CHECK(lowest < 0.01);
  const auto enc = result.model->encode(one[0], nullptr);
  CHECK(result.model->predict(enc) == gold_events(enc.sentence));
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto corpus = fixture();
  const Corpus part(corpus.begin(), corpus.begin() + 12);
  auto cfg = testing::micro_config();
  cfg.epochs = 2;
  cfg.dropout = 0.5;
  auto run = [&] { return train(part, {}, cfg, build_vocab(corpus), vocabulary_from_corpus(part, cfg.word_dim)); };
  const auto a = run();
  const auto b = run();
  CHECK(a.history[0].train_loss == b.history[0].train_loss);
  CHECK(a.metrics_lines == b.metrics_lines);

  cfg.seed = 2;
  const auto c = run();
  CHECK(c.history[0].train_loss != a.history[0].train_loss);

  // Parallel gradient accumulation only reorders floating-point sums.
  cfg.seed = 1;
  cfg.threads = 3;
  const auto d = run();
  CHECK(d.history[0].train_loss == doctest::Approx(a.history[0].train_loss).epsilon(1e-9));
}

TEST_CASE("pad rows stay zero through training") {
  const auto corpus = fixture();
  const Corpus part(corpus.begin(), corpus.begin() + 10);
  auto cfg = testing::micro_config();
  cfg.epochs = 3;
  cfg.l2 = 1e-3;
  const auto r = train(part, {}, cfg, build_vocab(corpus), vocabulary_from_corpus(part, cfg.word_dim));
  for (const char* name : {"word_embedding", "pos_embedding", "dep_embedding"}) {
    const auto* p = r.model->params().find(name);
    REQUIRE(p != nullptr);
    CHECK(p->value.row(kPadRow).isZero());
    CHECK_FALSE(p->value.row(kUnkRow).isZero());
  }
}

TEST_CASE("metrics lines") {
  const auto corpus = fixture();
  const Corpus tr(corpus.begin(), corpus.begin() + 8);
  const Corpus dev(corpus.begin() + 8, corpus.begin() + 12);
  auto cfg = testing::micro_config();
  cfg.epochs = 2;
  std::vector<std::string> seen;
  TrainOptions opts;
  opts.on_metrics = [&](const std::string& l) { seen.push_back(l); };
  const auto r = train(tr, dev, cfg, build_vocab(corpus), vocabulary_from_corpus(tr, cfg.word_dim), opts);
  REQUIRE(seen.size() == 4);
  CHECK(seen == r.metrics_lines);
  CHECK(seen[0].find(R"("split":"train")") != std::string::npos);
  CHECK(seen[1].find(R"("split":"dev")") != std::string::npos);
  CHECK(seen[1].find(R"("role_f1")") != std::string::npos);
  CHECK_THROWS_AS(train({}, {}, cfg, build_vocab(corpus), vocabulary_from_corpus(tr, 8)), TrainingError);
}
