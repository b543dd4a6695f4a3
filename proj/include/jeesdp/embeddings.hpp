// Embedding tables and assembly of the per-token input matrix.
#ifndef JEESDP_EMBEDDINGS_HPP_
#define JEESDP_EMBEDDINGS_HPP_

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "jeesdp/config.hpp"
#include "jeesdp/corpus.hpp"
#include "jeesdp/tensor.hpp"

namespace jeesdp {

using Scalar = double;
using Matrixd = ad::Matrix<Scalar>;
using Var = ad::Var<Scalar>;
using Tape = ad::Tape<Scalar>;
using Param = ad::Parameter<Scalar>;
using Params = ad::ParameterSet<Scalar>;
using Grads = ad::Gradients<Scalar>;

// Reserved rows of every symbol table.
inline constexpr Eigen::Index kPadRow = 0;
inline constexpr Eigen::Index kUnkRow = 1;

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Word list with optional pretrained vectors (one row per word).
struct WordVectors {
  int dim = 300;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  Matrixd vectors;  // words.size() x dim; empty when randomly initialised

  bool pretrained() const { return vectors.rows() > 0; }
  // Row in the embedding table: PAD, UNK, then words in order. Case-folded.
  Eigen::Index table_row(const std::string& word) const;
  void add(const std::string& word);
};

std::string case_fold(const std::string& word);

// Text format: one entry per line, the word followed by `dim` floats.
WordVectors load_word_vectors(const std::string& path, int dim = 300);
// Case-folded training vocabulary in sorted order, no vectors.
WordVectors vocabulary_from_corpus(const Corpus& corpus, int dim);

// Precomputed contextual vectors keyed by sentence id.
class ContextualVectors {
 public:
  explicit ContextualVectors(int dim = 768) : dim_(dim) {}
  int dim() const { return dim_; }
  bool empty() const { return by_id_.empty(); }
  void add(const std::string& id, Matrixd rows);
  // Rows for `s`; throws when absent or when the row count differs from the
  // sentence's token count.
  const Matrixd& for_sentence(const std::string& id, int num_tokens) const;

 private:
  int dim_;
  std::unordered_map<std::string, Matrixd> by_id_;
};

// JSON Lines: {"id": ..., "vectors": [[dim floats] per token]}.
ContextualVectors load_contextual(const std::string& path, int dim = 768);

// Signed distance from token k to a span: 0 inside, measured to the nearest
// boundary outside, clipped to [-(max_length - 1), max_length - 1].
int position_distance(int k, const Span& span, int max_length);

struct EmbeddingTables {
  Param* word = nullptr;
  Param* pos = nullptr;
  Param* dep = nullptr;
  Param* entity_projection = nullptr;
  Param* pf_trigger = nullptr;
  Param* pf_argument = nullptr;
  Param* sdp_length = nullptr;
  Param* argument_type = nullptr;
};

// Creates every table in `params`, initialised uniform(-init_scale,
// init_scale) from `rng`; PAD rows are zero and frozen.
EmbeddingTables make_embedding_tables(Params& params, const TrainConfig& cfg, const LabelVocab& vocab,
                                      const WordVectors& words, std::mt19937_64& rng);

// Index inputs of one normalized sentence (length max_length).
struct SentenceFeatures {
  int real_length = 0;
  std::vector<Eigen::Index> word_rows;
  std::vector<Eigen::Index> pos_rows;
  std::vector<Eigen::Index> dep_rows;
  Matrixd entity_multihot;  // max_length x |entity types|
  Matrixd contextual;       // max_length x contextual_dim, or empty
};

// `original_length` is the token count before truncation, which is what the
// contextual rows were computed for; -1 means the sentence was not cut.
SentenceFeatures sentence_features(const Sentence& normalized, const LabelVocab& vocab, const WordVectors& words,
                                   const TrainConfig& cfg, const ContextualVectors* contextual,
                                   int original_length = -1);

// Sum of the enabled channel widths.
int input_width(const TrainConfig& cfg, const LabelVocab& vocab);

// Per token [contextual | word | entity | POS | dep-rel] over the enabled
// channels; pad rows are zero.
Var assemble_sentence_matrix(Tape& tape, const EmbeddingTables& tables, const SentenceFeatures& f,
                             const TrainConfig& cfg);

// max_length x dim rows of `table` for the distances of every token to
// `span`; rows at pad positions are zero.
Var position_features(Tape& tape, const Param& table, const Span& span, int real_length, int max_length);

Var sdp_l_embedding(Tape& tape, const Param& table, int length);
Var argument_type_embedding(Tape& tape, const Param& table, int etype);

}  // namespace jeesdp

#endif  // JEESDP_EMBEDDINGS_HPP_
