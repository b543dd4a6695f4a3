// Span-exact precision/recall/F1 scoring of predicted events.
#ifndef JEESDP_EVALUATION_HPP_
#define JEESDP_EVALUATION_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "jeesdp/corpus.hpp"

namespace jeesdp {

struct PredictedArgument {
  int trigger_idx = 0;
  Span span;
  std::string entity_id;
  std::string role;
  friend bool operator==(const PredictedArgument&, const PredictedArgument&) = default;
};

// Decoded events of one sentence.
struct EventPrediction {
  std::string sentence_id;
  std::vector<TriggerMention> triggers;
  std::vector<PredictedArgument> arguments;
  friend bool operator==(const EventPrediction&, const EventPrediction&) = default;
};

// The gold annotation expressed as a prediction.
EventPrediction gold_events(const Sentence& s);
std::vector<EventPrediction> gold_events(const Corpus& corpus);

std::string prediction_to_json(const EventPrediction& p);
EventPrediction prediction_from_json(const std::string& line);
void write_predictions(std::ostream& out, const std::vector<EventPrediction>& preds);
std::vector<EventPrediction> read_predictions(std::istream& in);

struct ScoreReport {
  long predicted = 0;
  long gold = 0;
  long correct = 0;

  double precision() const { return predicted == 0 ? 0.0 : static_cast<double>(correct) / predicted; }
  double recall() const { return gold == 0 ? 0.0 : static_cast<double>(correct) / gold; }
  double f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  ScoreReport& operator+=(const ScoreReport& o) {
    predicted += o.predicted;
    gold += o.gold;
    correct += o.correct;
    return *this;
  }
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ArgumentMode { kIdentification, kRole };

// Predictions and gold are paired by position; ids must agree.
ScoreReport score_triggers(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold);
ScoreReport score_arguments(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold,
                            ArgumentMode mode);

struct EventScores {
  ScoreReport trigger;
  ScoreReport identification;
  ScoreReport role;
};

EventScores score_all(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold);

// Sentence indices grouped by gold trigger count.
struct OneVsManySplit {
  std::vector<std::size_t> one_event;
  std::vector<std::size_t> multi_event;
  std::vector<std::size_t> excluded;  // no gold trigger
};

OneVsManySplit split_one_vs_many(const Corpus& corpus);
OneVsManySplit split_one_vs_many(const std::vector<EventPrediction>& gold);

struct DistanceBin {
  int low = 1;   // inclusive
  int high = 3;  // inclusive
  ScoreReport report;
};

// Role-mode scores binned by |trigger start - argument start|; bin b covers
// [b * width + 1, (b + 1) * width] and distance 0 joins the first bin.
std::vector<DistanceBin> distance_bin_report(const std::vector<EventPrediction>& pred,
                                             const std::vector<EventPrediction>& gold, int bin_width = 3);

std::string report_json(const EventScores& s);
std::string report_table(const EventScores& s, const std::string& title = "");
std::string distance_csv(const std::vector<DistanceBin>& bins);

}  // namespace jeesdp

#endif  // JEESDP_EVALUATION_HPP_
