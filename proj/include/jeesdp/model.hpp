// The joint extraction network: trigger stage and argument stage over shared
// parameters, plus decoding of one sentence into events.
#ifndef JEESDP_MODEL_HPP_
#define JEESDP_MODEL_HPP_

#include <cstdint>
#include <vector>

#include "jeesdp/argument_net.hpp"
#include "jeesdp/config.hpp"
#include "jeesdp/corpus.hpp"
#include "jeesdp/embeddings.hpp"
#include "jeesdp/evaluation.hpp"
#include "jeesdp/graph_sdp.hpp"
#include "jeesdp/trigger_net.hpp"

namespace jeesdp {

// Everything about a sentence that does not depend on parameters.
struct EncodedSentence {
  Sentence sentence;  // normalized
  SentenceFeatures features;
  std::vector<int> gold_bio;  // one label per row, O on pads
  std::vector<int> entity_types;
  IntMatrix entity_mask;  // n_e x L
  AllPairsPaths paths;
  IntMatrix argument_sdp_l;  // n_e x n_e
  SdpLAdjacencySet<Scalar> argument_levels;
  SdpResult gold_sdp;    // gold triggers x entities
  IntMatrix gold_roles;  // n_t x n_e role indices, 0 = NoRole

  int real_length() const { return features.real_length; }
  int num_entities() const { return static_cast<int>(entity_types.size()); }
  int num_triggers() const { return static_cast<int>(sentence.triggers.size()); }
};

struct TriggerForward {
  Var encoded;  // L x 2H
  Var probs;    // L x (2 |subtypes| + 1)
};

struct ArgumentForward {
  Var features;     // O, n_e x n_o
  Var graph;        // I, n_e x n_o; empty without the graph convolution
  Var scores;       // n_e x (n_s + 1); empty without attention
  Var role_probs;   // n_e x |roles|
  Var ident_probs;  // n_e x 2; empty without the identification head
};

class Model {
 public:
  Model(const TrainConfig& cfg, LabelVocab vocab, WordVectors words);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const TrainConfig& config() const { return cfg_; }
  const LabelVocab& vocab() const { return vocab_; }
  const WordVectors& words() const { return words_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const GcnSdpParams* gcn() const { return cfg_.gcn ? &gcn_ : nullptr; }

  int pair_width() const;     // n_h
  int feature_width() const;  // n_o
  int num_roles() const { return static_cast<int>(vocab_.roles().size()); }

  // Normalizes `raw` and precomputes features, paths, and gold targets.
  EncodedSentence encode(const Sentence& raw, const ContextualVectors* contextual) const;

  TriggerForward trigger_forward(Tape& tape, const EncodedSentence& s, bool train) const;

  // Argument stage for one trigger against every entity of the sentence.
  // `sdp` is that trigger's n_e x L mask block, `sdp_len` its 1 x n_e row.
  ArgumentForward argument_forward(Tape& tape, const EncodedSentence& s, const TriggerForward& trig,
                                   const Span& trigger, const IntMatrix& sdp, const IntVector& sdp_len,
                                   bool train) const;

  // Argmax decoding; NoRole arguments are omitted.
  EventPrediction predict(const EncodedSentence& s) const;

  // Rounds every parameter through 32-bit float.
  void round_to_float32();

 private:
  TrainConfig cfg_;
  LabelVocab vocab_;
  WordVectors words_;
  Params params_;
  EmbeddingTables tables_;
  BiLstmParams bilstm_;
  TriggerHeadParams trigger_head_;
  DmcnnParams dmcnn_;
  GcnSdpParams gcn_;
  OutputHeadParams role_head_;
  OutputHeadParams ident_head_;
};

}  // namespace jeesdp

#endif  // JEESDP_MODEL_HPP_
