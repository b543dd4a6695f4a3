// Bidirectional LSTM encoder and per-token BIO trigger head.
#ifndef JEESDP_TRIGGER_NET_HPP_
#define JEESDP_TRIGGER_NET_HPP_

#include <random>
#include <vector>

#include "jeesdp/corpus.hpp"
#include "jeesdp/embeddings.hpp"

namespace jeesdp {

// Gate blocks are laid out [input | forget | output | candidate].
struct LstmCellParams {
  Param* input_weight = nullptr;   // n_d x 4H
  Param* hidden_weight = nullptr;  // H x 4H
  Param* bias = nullptr;           // 1 x 4H
  int hidden() const { return static_cast<int>(hidden_weight->value.rows()); }
};

struct BiLstmParams {
  LstmCellParams forward;
  LstmCellParams backward;
};

struct TriggerHeadParams {
  Param* w1 = nullptr;  // 2H x hidden
  Param* b1 = nullptr;
  Param* w2 = nullptr;  // hidden x (2L + 1)
  Param* b2 = nullptr;
};

BiLstmParams make_bilstm(Params& params, int input_width, int hidden, std::mt19937_64& rng);
TriggerHeadParams make_trigger_head(Params& params, int input_width, int hidden, int labels, std::mt19937_64& rng);

// Glorot-uniform weight matrix.
Matrixd glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

// Runs both directions over the first `real_length` rows of X from zero
// states; P is X.rows() x 2H with [forward | backward] per row and zero rows
// at pad positions.
Var bilstm_forward(Tape& tape, const BiLstmParams& p, const Var& x, int real_length);

// softmax(W2 f(W1 P + b1) + b2) per row, f = ReLU. Dropout applies to the
// hidden layer when `train`.
Var trigger_output(Tape& tape, const TriggerHeadParams& p, const Var& encoded, double dropout, bool train);

enum class CandidateMode { kGold, kPredicted };

struct TriggerCandidates {
  std::vector<TriggerMention> triggers;
  std::vector<int> subtypes;  // vocab indices, aligned with triggers
};

// Row-wise argmax (first index on ties) over the real rows of `probs`.
std::vector<int> argmax_labels(const Matrixd& probs, int real_length);

// Predicted mode decodes the argmax labels; gold mode returns s's triggers.
TriggerCandidates extract_trigger_candidates(const Matrixd& probs, const Sentence& s, const LabelVocab& vocab,
                                             CandidateMode mode);

}  // namespace jeesdp

#endif  // JEESDP_TRIGGER_NET_HPP_
