#include "doctest.h"
#include "jeesdp/embeddings.hpp"
#include "support.hpp"

using namespace jeesdp;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.use_contextual = false;
  cfg.word_dim = 3;
  cfg.max_length = 8;
  return cfg;
}

Sentence tiny(int n) {
  Sentence s;
  s.id = "tiny";
  for (int i = 0; i < n; ++i) s.tokens.push_back({"w" + std::to_string(i), "NN", i == 0 ? kRootHead : 0, "dep"});
  return s;
}

}  // namespace

TEST_CASE("word vector file") {
  testing::TempDir dir;
  SUBCASE("two lines give two words plus PAD and UNK") {
    const auto path = dir.write("w.txt", "bush 0.1 0.2 0.3\nPutin 1 2 3\n");
    const auto wv = load_word_vectors(path, 3);
    CHECK(wv.words.size() == 2);
    CHECK(wv.vectors.rows() == 2);
    CHECK(wv.table_row("Bush") == 2);
    CHECK(wv.table_row("putin") == 3);
    CHECK(wv.table_row("France") == kUnkRow);

    Params ps;
    std::mt19937_64 rng(1);
    auto cfg = small_config();
    const auto vocab = build_vocab({tiny(2)});
    const auto tables = make_embedding_tables(ps, cfg, vocab, wv, rng);
    CHECK(tables.word->value.rows() == 4);
    CHECK(tables.word->value.row(kPadRow).isZero());
    CHECK(tables.word->value(3, 2) == 3.0);
    CHECK_FALSE(tables.word->trainable);

    // The UNK row is drawn from the seeded stream.
    Params again;
    std::mt19937_64 rng2(1);
    const auto t2 = make_embedding_tables(again, cfg, vocab, wv, rng2);
    CHECK(t2.word->value.row(kUnkRow) == tables.word->value.row(kUnkRow));
  }
  SUBCASE("short line is reported with its number") {
    const auto path = dir.write("w.txt", "a 1 2 3\nb 1 2\n");
    CHECK_THROWS_WITH_AS(load_word_vectors(path, 3), doctest::Contains("line 2"), EmbeddingError);
  }
  SUBCASE("dimension 300 with 299 floats") {
    std::string line = "word";
    for (int i = 0; i < 299; ++i) line += " 0.5";
    const auto path = dir.write("w.txt", line + "\n");
    CHECK_THROWS_WITH(load_word_vectors(path, 300), doctest::Contains("line 1"));
  }
}

TEST_CASE("contextual rows must align with tokens") {
  ContextualVectors ctx(4);
  ctx.add("five", Matrixd::Ones(5, 4));
  CHECK(ctx.for_sentence("five", 5).rows() == 5);
  CHECK_THROWS_AS(ctx.for_sentence("five", 4), EmbeddingError);
  CHECK_THROWS_AS(ctx.for_sentence("absent", 5), EmbeddingError);

  testing::TempDir dir;
  const auto path = dir.write("c.jsonl", R"({"id":"a","vectors":[[1,2],[3,4]]})" "\n");
  const auto loaded = load_contextual(path, 2);
  CHECK(loaded.for_sentence("a", 2)(1, 0) == 3.0);
}

TEST_CASE("channel off ignores missing contextual vectors") {
  auto cfg = small_config();
  const auto s = normalize_length(tiny(5), cfg.max_length);
  const auto vocab = build_vocab({s});
  const auto f = sentence_features(s, vocab, vocabulary_from_corpus({s}, 3), cfg, nullptr);
  CHECK(f.contextual.size() == 0);
  cfg.use_contextual = true;
  CHECK_THROWS_AS(sentence_features(s, vocab, vocabulary_from_corpus({s}, 3), cfg, nullptr), EmbeddingError);
}

TEST_CASE("input width sums the enabled channels") {
  TrainConfig cfg;
  const auto vocab = LabelVocab::ace2005();
  CHECK(input_width(cfg, vocab) == cfg.contextual_dim + cfg.word_dim + cfg.entity_dim + cfg.pos_dim + cfg.dep_dim);
  CHECK(input_width(cfg, vocab) == 1108);
  cfg.use_contextual = false;
  CHECK(input_width(cfg, vocab) == 340);
}

TEST_CASE("assembled matrix has zero pad rows") {
  auto cfg = small_config();
  auto raw = tiny(5);
  raw.entities.push_back({"e0", {1, 3}, "Person"});
  const auto s = normalize_length(raw, cfg.max_length);
  const auto vocab = build_vocab({raw});
  const auto words = vocabulary_from_corpus({raw}, 3);
  Params ps;
  std::mt19937_64 rng(3);
  const auto tables = make_embedding_tables(ps, cfg, vocab, words, rng);
  Tape t;
  const auto x = assemble_sentence_matrix(t, tables, sentence_features(s, vocab, words, cfg, nullptr), cfg).value();
  CHECK(x.rows() == 8);
  CHECK(x.cols() == input_width(cfg, vocab));
  for (int k = 0; k < 5; ++k) CHECK_FALSE(x.row(k).isZero());
  for (int k = 5; k < 8; ++k) CHECK(x.row(k).isZero());
}

TEST_CASE("position distance") {
  const int L = 50;
  // Putin (2) against summit (13) and against Bush (0).
  CHECK(position_distance(2, {13, 14}, L) == -11);
  CHECK(std::abs(position_distance(2, {13, 14}, L)) == 11);
  CHECK(position_distance(2, {0, 1}, L) == 2);
  CHECK(position_distance(11, {10, 13}, L) == 0);
  CHECK(position_distance(15, {10, 13}, L) == 3);
  CHECK(position_distance(0, {49, 50}, L) == -49);
  CHECK(position_distance(0, {49, 50}, 10) == -9);
}

TEST_CASE("position features use the distance-zero row inside the span and zero on pads") {
  Params ps;
  const int L = 6;
  Matrixd table(2 * L - 1, 2);
  for (int r = 0; r < table.rows(); ++r) table.row(r) << r, -r;
  auto& p = ps.add("pf", table);
  Tape t;
  const auto v = position_features(t, p, {2, 4}, 5, L).value();
  CHECK(v.row(2) == table.row(L - 1));
  CHECK(v.row(3) == table.row(L - 1));
  CHECK(v.row(0) == table.row(L - 1 - 2));
  CHECK(v.row(4) == table.row(L - 1 + 1));
  CHECK(v.row(5).isZero());
}

TEST_CASE("length and type lookups") {
  Params ps;
  std::mt19937_64 rng(2);
  auto cfg = small_config();
  const auto s = testing::running_example();
  const auto vocab = build_vocab({s});
  const auto tables = make_embedding_tables(ps, cfg, vocab, vocabulary_from_corpus({s}, 3), rng);
  Tape t;
  const auto five = sdp_l_embedding(t, *tables.sdp_length, 5).value();
  CHECK(five == tables.sdp_length->value.row(5));
  CHECK(sdp_l_embedding(t, *tables.sdp_length, 5).value() == five);
  // The sentinel n_w = L has its own row.
  CHECK(sdp_l_embedding(t, *tables.sdp_length, cfg.max_length).value() ==
        tables.sdp_length->value.row(cfg.max_length));
  CHECK_THROWS_AS(sdp_l_embedding(t, *tables.sdp_length, cfg.max_length + 1), EmbeddingError);
  const int gpe = *vocab.entity_type_index("Geo-political");
  CHECK(argument_type_embedding(t, *tables.argument_type, gpe).value() == tables.argument_type->value.row(gpe));
}
