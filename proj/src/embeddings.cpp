#include "jeesdp/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace jeesdp {

std::string case_fold(const std::string& word) {
  std::string out = word;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  return out;
}

Eigen::Index WordVectors::table_row(const std::string& word) const {
  if (word == kPadSymbol) return kPadRow;
  auto it = index.find(case_fold(word));
  return it == index.end() ? kUnkRow : it->second + 2;
}

void WordVectors::add(const std::string& word) {
  const auto key = case_fold(word);
  if (index.count(key) != 0) return;
  index.emplace(key, static_cast<int>(words.size()));
  words.push_back(key);
}

WordVectors load_word_vectors(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot open word vector file '" + path + "'");
  WordVectors wv;
  wv.dim = dim;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      double x = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw EmbeddingError("word vectors line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      v.push_back(x);
    }
    if (static_cast<int>(v.size()) != dim) {
      throw EmbeddingError("word vectors line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                           " values, found " + std::to_string(v.size()));
    }
    const auto key = case_fold(word);
    if (wv.index.count(key) != 0) {
      throw EmbeddingError("word vectors line " + std::to_string(line_no) + ": duplicate word '" + word + "'");
    }
    wv.index.emplace(key, static_cast<int>(wv.words.size()));
    wv.words.push_back(key);
    rows.push_back(std::move(v));
  }
  wv.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < dim; ++c) wv.vectors(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return wv;
}

WordVectors vocabulary_from_corpus(const Corpus& corpus, int dim) {
  std::set<std::string> all;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      if (t.text != kPadSymbol) all.insert(case_fold(t.text));
    }
  }
  WordVectors wv;
  wv.dim = dim;
  for (const auto& w : all) wv.add(w);
  return wv;
}

void ContextualVectors::add(const std::string& id, Matrixd rows) {
  if (rows.cols() != dim_) {
    throw EmbeddingError("contextual vectors for '" + id + "' have dimension " + std::to_string(rows.cols()) +
                         ", expected " + std::to_string(dim_));
  }
  by_id_[id] = std::move(rows);
}

const Matrixd& ContextualVectors::for_sentence(const std::string& id, int num_tokens) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw EmbeddingError("no contextual vectors for sentence '" + id + "'");
  if (it->second.rows() != num_tokens) {
    throw EmbeddingError("contextual vectors for '" + id + "' have " + std::to_string(it->second.rows()) +
                         " rows but the sentence has " + std::to_string(num_tokens) + " tokens");
  }
  return it->second;
}

ContextualVectors load_contextual(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot open contextual vector file '" + path + "'");
  ContextualVectors cv(dim);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("id").get<std::string>();
      const auto& vecs = j.at("vectors");
      Matrixd m(static_cast<Eigen::Index>(vecs.size()), dim);
      for (std::size_t r = 0; r < vecs.size(); ++r) {
        if (static_cast<int>(vecs[r].size()) != dim) {
          throw EmbeddingError("row " + std::to_string(r) + " has dimension " + std::to_string(vecs[r].size()) +
                               ", expected " + std::to_string(dim));
        }
        for (int c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), c) = vecs[r][static_cast<std::size_t>(c)].get<double>();
      }
      cv.add(id, std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw EmbeddingError("contextual vectors line " + std::to_string(line_no) + ": " + e.what());
    } catch (const EmbeddingError& e) {
      throw EmbeddingError("contextual vectors line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cv;
}

int position_distance(int k, const Span& span, int max_length) {
  int d = 0;
  if (k >= span.end) {
    d = k - (span.end - 1);
  } else if (k < span.start) {
    d = k - span.start;
  }
  const int lim = max_length - 1;
  return std::clamp(d, -lim, lim);
}

namespace {

Param& symbol_table(Params& params, const std::string& name, Eigen::Index symbols, int dim, double scale,
                    std::mt19937_64& rng) {
  Matrixd m = ad::uniform_matrix<Scalar>(symbols + 2, dim, scale, rng);
  m.row(kPadRow).setZero();
  auto& p = params.add(name, std::move(m));
  p.frozen_rows = {kPadRow};
  return p;
}

}  // namespace

EmbeddingTables make_embedding_tables(Params& params, const TrainConfig& cfg, const LabelVocab& vocab,
                                      const WordVectors& words, std::mt19937_64& rng) {
  EmbeddingTables t;
  const double s = cfg.init_scale;
  const auto n_types = static_cast<Eigen::Index>(vocab.entity_types().size());
  if (cfg.use_word) {
    auto& w = symbol_table(params, "word_embedding", static_cast<Eigen::Index>(words.words.size()), cfg.word_dim, s, rng);
    if (words.pretrained()) {
      if (words.dim != cfg.word_dim) throw EmbeddingError("word vector dimension does not match word_dim");
      w.value.bottomRows(words.vectors.rows()) = words.vectors;
      w.trainable = cfg.word_vectors_trainable;
    }
    t.word = &w;
  }
  if (cfg.use_pos) {
    t.pos = &symbol_table(params, "pos_embedding", static_cast<Eigen::Index>(vocab.pos_tags().size()), cfg.pos_dim, s, rng);
  }
  if (cfg.use_dep) {
    t.dep = &symbol_table(params, "dep_embedding", static_cast<Eigen::Index>(vocab.dep_rels().size()), cfg.dep_dim, s, rng);
  }
  if (cfg.use_entity && cfg.entity_projection) {
    t.entity_projection =
        &params.add("entity_projection", ad::uniform_matrix<Scalar>(std::max<Eigen::Index>(n_types, 1), cfg.entity_dim, s, rng));
  }
  const int pf_rows = 2 * cfg.max_length - 1;
  t.pf_trigger = &params.add("pf_trigger", ad::uniform_matrix<Scalar>(pf_rows, cfg.position_dim, s, rng));
  t.pf_argument = &params.add("pf_argument", ad::uniform_matrix<Scalar>(pf_rows, cfg.position_dim, s, rng));
  t.sdp_length =
      &params.add("sdp_length_embedding", ad::uniform_matrix<Scalar>(cfg.max_length + 1, cfg.sdp_length_dim, s, rng));
  t.argument_type = &params.add("argument_type_embedding",
                                ad::uniform_matrix<Scalar>(std::max<Eigen::Index>(n_types, 1), cfg.argument_type_dim, s, rng));
  return t;
}

SentenceFeatures sentence_features(const Sentence& s, const LabelVocab& vocab, const WordVectors& words,
                                   const TrainConfig& cfg, const ContextualVectors* contextual, int original_length) {
  SentenceFeatures f;
  f.real_length = s.real_length();
  const int L = s.size();
  for (int k = 0; k < L; ++k) {
    const auto& tok = s.tokens[static_cast<std::size_t>(k)];
    const bool pad = k >= f.real_length;
    f.word_rows.push_back(pad ? kPadRow : words.table_row(tok.text));
    const auto p = vocab.pos_index(tok.pos);
    f.pos_rows.push_back(pad ? kPadRow : (p ? *p + 2 : kUnkRow));
    const auto d = vocab.dep_rel_index(tok.dep_rel);
    f.dep_rows.push_back(pad ? kPadRow : (d ? *d + 2 : kUnkRow));
  }
  f.entity_multihot = entity_multihot(s, vocab);
  if (cfg.use_contextual) {
    if (contextual == nullptr) throw EmbeddingError("contextual channel enabled but no contextual vectors loaded");
    const auto& rows = contextual->for_sentence(s.id, original_length < 0 ? f.real_length : original_length);
    f.contextual = Matrixd::Zero(L, contextual->dim());
    f.contextual.topRows(f.real_length) = rows.topRows(f.real_length);
  }
  return f;
}

int input_width(const TrainConfig& cfg, const LabelVocab& vocab) {
  int w = 0;
  if (cfg.use_contextual) w += cfg.contextual_dim;
  if (cfg.use_word) w += cfg.word_dim;
  if (cfg.use_entity) w += cfg.entity_projection ? cfg.entity_dim : static_cast<int>(vocab.entity_types().size());
  if (cfg.use_pos) w += cfg.pos_dim;
  if (cfg.use_dep) w += cfg.dep_dim;
  return w;
}

Var assemble_sentence_matrix(Tape& tape, const EmbeddingTables& tables, const SentenceFeatures& f,
                             const TrainConfig& cfg) {
  std::vector<Var> parts;
  if (cfg.use_contextual) {
    if (f.contextual.cols() != cfg.contextual_dim) throw EmbeddingError("contextual features missing for sentence");
    parts.push_back(tape.constant(f.contextual));
  }
  if (cfg.use_word) parts.push_back(ad::embedding_lookup(tape, *tables.word, f.word_rows));
  if (cfg.use_entity) {
    auto multihot = tape.constant(f.entity_multihot);
    if (cfg.entity_projection) {
      if (f.entity_multihot.cols() == 0) {
        parts.push_back(tape.constant(Matrixd::Zero(f.entity_multihot.rows(), cfg.entity_dim)));
      } else {
        parts.push_back(ad::matmul(multihot, tape.param(*tables.entity_projection)));
      }
    } else if (f.entity_multihot.cols() > 0) {
      parts.push_back(multihot);
    }
  }
  if (cfg.use_pos) parts.push_back(ad::embedding_lookup(tape, *tables.pos, f.pos_rows));
  if (cfg.use_dep) parts.push_back(ad::embedding_lookup(tape, *tables.dep, f.dep_rows));
  if (parts.empty()) throw EmbeddingError("no input channels enabled");
  return ad::concat_cols(parts);
}

Var position_features(Tape& tape, const Param& table, const Span& span, int real_length, int max_length) {
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(real_length));
  for (int k = 0; k < real_length; ++k) rows.push_back(position_distance(k, span, max_length) + max_length - 1);
  auto real = ad::embedding_lookup(tape, table, rows);
  if (real_length == max_length) return real;
  auto pads = tape.constant(Matrixd::Zero(max_length - real_length, table.value.cols()));
  if (real_length == 0) return pads;
  return ad::concat_rows<Scalar>({real, pads});
}

Var sdp_l_embedding(Tape& tape, const Param& table, int length) {
  if (length < 0 || length >= table.value.rows()) {
    throw EmbeddingError("SDP length " + std::to_string(length) + " outside the embedding table");
  }
  return ad::embedding_lookup(tape, table, {length});
}

Var argument_type_embedding(Tape& tape, const Param& table, int etype) {
  if (etype < 0 || etype >= table.value.rows()) {
    throw EmbeddingError("argument type " + std::to_string(etype) + " outside the embedding table");
  }
  return ad::embedding_lookup(tape, table, {etype});
}

}  // namespace jeesdp
