#include <cstring>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "jeesdp/checkpoint.hpp"
#include "jeesdp/config.hpp"
#include "jeesdp/synthetic.hpp"
#include "jeesdp/training.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace jeesdp;

namespace {

std::unique_ptr<Model> scrambled_model(const Corpus& corpus, std::uint64_t seed = 4) {
  auto cfg = testing::micro_config();
  auto m = std::make_unique<Model>(cfg, build_vocab(corpus), vocabulary_from_corpus(corpus, cfg.word_dim));
  std::mt19937_64 rng(seed);
  auto& ps = m->params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].value = ad::uniform_matrix<Scalar>(ps[i].value.rows(), ps[i].value.cols(), 0.7, rng);
    for (auto r : ps[i].frozen_rows) ps[i].value.row(r).setZero();
  }
  return m;
}

std::uint32_t header_length(const std::string& bytes) {
  std::uint32_t n = 0;
  for (int i = 3; i >= 0; --i) n = (n << 8) | static_cast<unsigned char>(bytes[4 + static_cast<std::size_t>(i)]);
  return n;
}

std::string with_header(const std::string& bytes, const nlohmann::json& header) {
  const std::string h = header.dump();
  std::string out = "JSDP";
  const auto n = static_cast<std::uint32_t>(h.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
  return out + h + bytes.substr(8 + header_length(bytes));
}

}  // namespace

TEST_CASE("defaults follow the published hyperparameters") {
  const TrainConfig c;
  CHECK(c.word_dim == 300);
  CHECK(c.contextual_dim == 768);
  CHECK(c.dep_dim == 15);
  CHECK(c.argument_type_dim == 10);
  CHECK(c.pos_dim == 15);
  CHECK(c.position_dim == 10);
  CHECK(c.lstm_hidden == 64);
  CHECK(c.l2 == 1e-4);
  CHECK(c.dropout == 0.5);
  CHECK(c.batch_size == 32);
  CHECK(c.filters == 50);
  CHECK(c.window == 3);
  CHECK(c.trigger_hidden == 256);
  CHECK(c.identification_hidden == 256);
  CHECK(c.role_hidden == 512);
  CHECK(c.max_length == 50);
  CHECK(c.max_sdp_length == 10);
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.adam_beta1 == 0.9);
  CHECK(c.adam_beta2 == 0.999);
  CHECK(c.adam_epsilon == 1e-8);
  CHECK(c.patience == 10);
  CHECK(c.threads == 1);
}

TEST_CASE("run config parsing") {
  std::istringstream in(
      "# comment\n"
      "\n"
      "corpus = data/train.jsonl\n"
      "learning_rate = 0.01   # trailing comment\n"
      "gcn = off\n"
      "epochs=7\n");
  const auto rc = parse_run_config(in);
  CHECK(rc.corpus == "data/train.jsonl");
  CHECK(rc.train.learning_rate == 0.01);
  CHECK_FALSE(rc.train.gcn);
  CHECK(rc.train.epochs == 7);
  CHECK(rc.train.batch_size == 32);

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_WITH_AS(parse_run_config(unknown), doctest::Contains("unknown config key 'colour'"), ConfigError);
  std::istringstream bad("dropout = lots\n");
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  std::istringstream no_eq("dropout 0.5\n");
  CHECK_THROWS_WITH(parse_run_config(no_eq), doctest::Contains("line 1"));
}

TEST_CASE("every key has a rendered default that parses back") {
  const auto defaults = config_defaults();
  CHECK(defaults.size() > 40);
  RunConfig rc;
  for (const auto& [k, v] : defaults) {
    INFO(k);
    CHECK_NOTHROW(set_config_value(rc, k, v));
  }
  CHECK(to_key_values(rc.train) == to_key_values(TrainConfig{}));
  CHECK(describe_config_keys().find("batch_size") != std::string::npos);
}

TEST_CASE("key-value snapshot round-trip") {
  TrainConfig c;
  c.learning_rate = 0.0123;
  c.seed = 99;
  c.attention = false;
  const auto back = from_key_values(to_key_values(c));
  CHECK(to_key_values(back) == to_key_values(c));
  CHECK(back.learning_rate == 0.0123);
  CHECK_FALSE(back.attention);
}

TEST_CASE("checkpoint round-trip") {
  const auto corpus = synthetic_corpus();
  auto model = scrambled_model(corpus);
  const auto bytes = serialize_checkpoint(*model);
  CHECK(bytes.substr(0, 4) == "JSDP");

  std::size_t floats = 0;
  for (std::size_t i = 0; i < model->params().size(); ++i) {
    floats += static_cast<std::size_t>(model->params()[i].value.size());
  }
  CHECK(bytes.size() == 8 + header_length(bytes) + 4 * floats);

  const auto manifest = checkpoint_manifest(bytes);
  REQUIRE(manifest.size() == model->params().size());
  CHECK(manifest[0].name == model->params()[0].name);

  auto loaded = deserialize_checkpoint(bytes);
  model->round_to_float32();
  for (std::size_t i = 0; i < model->params().size(); ++i) {
    INFO(model->params()[i].name);
    CHECK(loaded->params()[i].value == model->params()[i].value);
    CHECK(loaded->params()[i].trainable == model->params()[i].trainable);
  }
  CHECK(loaded->vocab() == model->vocab());
  CHECK(loaded->words().words == model->words().words);
  CHECK(serialize_checkpoint(*loaded) == serialize_checkpoint(*model));

  const auto a = predict_corpus(*model, corpus, nullptr);
  const auto b = predict_corpus(*loaded, corpus, nullptr);
  CHECK(a == b);
}

TEST_CASE("checkpoint files are written atomically") {
  testing::TempDir dir;
  const auto corpus = synthetic_corpus();
  auto model = scrambled_model(corpus);
  const auto path = dir.file("m.jsdp");
  save_checkpoint(*model, path);
  save_checkpoint(*model, path);
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(path).parent_path())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  CHECK(testing::slurp(path) == serialize_checkpoint(*model));
  CHECK(load_checkpoint(path)->params().size() == model->params().size());
}

TEST_CASE("damaged checkpoints are rejected") {
  const auto corpus = synthetic_corpus();
  auto model = scrambled_model(corpus);
  const auto bytes = serialize_checkpoint(*model);
  CHECK_THROWS_WITH_AS(deserialize_checkpoint("JSDX" + bytes.substr(4)), doctest::Contains("not a JSDP"),
                       CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 4)), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), CheckpointError);

  auto header = nlohmann::json::parse(bytes.substr(8, header_length(bytes)));
  SUBCASE("config that implies other widths") {
    header["config"]["filters"] = "9";
    CHECK_THROWS_WITH_AS(deserialize_checkpoint(with_header(bytes, header)), doctest::Contains("width mismatch"),
                         CheckpointError);
  }
  SUBCASE("unknown format version") {
    header["format_version"] = 2;
    CHECK_THROWS_WITH(deserialize_checkpoint(with_header(bytes, header)), doctest::Contains("version"));
  }
}
