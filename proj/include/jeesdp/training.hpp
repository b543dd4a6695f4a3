// Joint loss, the Adam optimizer, and the minibatch training loop.
#ifndef JEESDP_TRAINING_HPP_
#define JEESDP_TRAINING_HPP_

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "jeesdp/evaluation.hpp"
#include "jeesdp/model.hpp"

namespace jeesdp {

// Raised on a non-finite loss or gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossWeights {
  double trigger = 1.0;
  double role = 1.0;
  double identification = 1.0;
};

// -sum_r log p(r, gold[r]), with probabilities clamped at 1e-12.
Var cross_entropy_sum(const Var& probs, const std::vector<Eigen::Index>& gold);

// Mean trigger cross-entropy over the rows of `trigger_probs` plus mean role
// cross-entropy over the rows of `role_probs` (plus the identification term
// when given), plus l2 * sum ||W||^2 over trainable non-bias parameters of
// `params` when it is not null.
Var joint_loss(const Var& trigger_probs, const std::vector<Eigen::Index>& gold_labels, const Var& role_probs,
               const std::vector<Eigen::Index>& gold_roles, const Params* params = nullptr, double l2 = 0.0,
               const LossWeights& weights = {}, const Var* ident_probs = nullptr,
               const std::vector<Eigen::Index>* gold_ident = nullptr);

double l2_penalty(const Params& params, double l2);
// The same penalty recorded on a tape.
Var l2_term(Tape& tape, const Params& params, double l2);
// Adds the gradient of l2_penalty into `grads`.
void add_l2_gradient(const Params& params, double l2, Grads& grads);

// Normalizers of one batch: real tokens and (gold trigger, entity) pairs.
struct BatchCounts {
  long tokens = 0;
  long pairs = 0;
};

BatchCounts count_targets(const std::vector<const EncodedSentence*>& batch);

struct SentenceLoss {
  Var total;  // already divided by the batch counts; empty if nothing to score
  double trigger = 0.0;
  double role = 0.0;
  double identification = 0.0;
};

// Teacher-forced data loss of one sentence: gold triggers drive the argument
// stage while the live trigger probabilities feed the pair input.
SentenceLoss sentence_loss(Tape& tape, const Model& model, const EncodedSentence& s, const BatchCounts& counts,
                           bool train, const LossWeights& weights = {});

class Adam {
 public:
  Adam(const Params& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
  // One bias-corrected update; untrainable parameters and frozen rows are
  // left as they are. Throws NumericError naming the first parameter with a
  // non-finite gradient, before anything is updated.
  void step(Params& params, const Grads& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  std::vector<Matrixd> m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  EventScores scores;  // on the selection split
  double selection_loss = 0.0;
};

struct TrainOptions {
  // Called with every metrics line as it is produced.
  std::function<void(const std::string&)> on_metrics;
  const ContextualVectors* contextual = nullptr;
};

struct TrainResult {
  std::unique_ptr<Model> model;  // holds the selected parameters
  int best_epoch = 0;
  EventScores best_scores;
  std::vector<EpochRecord> history;
  std::vector<std::string> metrics_lines;
};

// Trains on `train_set`, selecting on `dev_set` (the training set itself
// when dev_set is empty) by argument-role F1, ties broken by trigger F1.
TrainResult train(const Corpus& train_set, const Corpus& dev_set, const TrainConfig& cfg, LabelVocab vocab,
                  WordVectors words, const TrainOptions& options = {});

std::vector<EncodedSentence> encode_corpus(const Model& model, const Corpus& corpus,
                                           const ContextualVectors* contextual);
std::vector<EventPrediction> predict_corpus(const Model& model, const std::vector<EncodedSentence>& sentences,
                                            int threads = 1);
std::vector<EventPrediction> predict_corpus(const Model& model, const Corpus& corpus,
                                            const ContextualVectors* contextual, int threads = 1);

}  // namespace jeesdp

#endif  // JEESDP_TRAINING_HPP_
