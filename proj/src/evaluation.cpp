#include "jeesdp/evaluation.hpp"

#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace jeesdp {

using nlohmann::json;
using nlohmann::ordered_json;

EventPrediction gold_events(const Sentence& s) {
  EventPrediction p;
  p.sentence_id = s.id;
  p.triggers = s.triggers;
  for (const auto& a : s.arguments) {
    const auto* e = s.find_entity(a.entity_id);
    if (e == nullptr) throw EvaluationError("argument references missing entity '" + a.entity_id + "'");
    p.arguments.push_back({a.trigger_idx, e->span, a.entity_id, a.role});
  }
  return p;
}

std::vector<EventPrediction> gold_events(const Corpus& corpus) {
  std::vector<EventPrediction> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(gold_events(s));
  return out;
}

std::string prediction_to_json(const EventPrediction& p) {
  ordered_json j;
  j["id"] = p.sentence_id;
  j["triggers"] = ordered_json::array();
  for (const auto& t : p.triggers) {
    j["triggers"].push_back({{"start", t.span.start}, {"end", t.span.end}, {"subtype", t.subtype}});
  }
  j["arguments"] = ordered_json::array();
  for (const auto& a : p.arguments) {
    j["arguments"].push_back({{"trigger_idx", a.trigger_idx},
                              {"entity_id", a.entity_id},
                              {"start", a.span.start},
                              {"end", a.span.end},
                              {"role", a.role}});
  }
  return j.dump();
}

EventPrediction prediction_from_json(const std::string& line) {
  try {
    const auto j = json::parse(line);
    EventPrediction p;
    p.sentence_id = j.at("id").get<std::string>();
    for (const auto& t : j.at("triggers")) {
      p.triggers.push_back({{t.at("start").get<int>(), t.at("end").get<int>()}, t.at("subtype").get<std::string>()});
    }
    for (const auto& a : j.at("arguments")) {
      const int ti = a.at("trigger_idx").get<int>();
      if (ti < 0 || ti >= static_cast<int>(p.triggers.size())) {
        throw EvaluationError("argument references missing trigger " + std::to_string(ti));
      }
      p.arguments.push_back({ti,
                             {a.at("start").get<int>(), a.at("end").get<int>()},
                             a.value("entity_id", std::string()),
                             a.at("role").get<std::string>()});
    }
    return p;
  } catch (const json::exception& e) {
    throw EvaluationError(std::string("malformed prediction record: ") + e.what());
  }
}

void write_predictions(std::ostream& out, const std::vector<EventPrediction>& preds) {
  for (const auto& p : preds) out << prediction_to_json(p) << '\n';
}

std::vector<EventPrediction> read_predictions(std::istream& in) {
  std::vector<EventPrediction> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from_json(line));
    } catch (const EvaluationError& e) {
      throw EvaluationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

void check_aligned(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold) {
  if (pred.size() != gold.size()) {
    throw EvaluationError("prediction count " + std::to_string(pred.size()) + " differs from gold count " +
                          std::to_string(gold.size()));
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].sentence_id != gold[i].sentence_id) {
      throw EvaluationError("sentence id mismatch at position " + std::to_string(i) + ": '" + pred[i].sentence_id +
                            "' vs '" + gold[i].sentence_id + "'");
    }
  }
}

using ArgKey = std::tuple<std::string, Span, std::string>;

struct ArgItem {
  ArgKey key;
  int bin = 0;
};

int distance_of(const EventPrediction& p, const PredictedArgument& a) {
  const int t = p.triggers.at(static_cast<std::size_t>(a.trigger_idx)).span.start;
  return std::abs(t - a.span.start);
}

int bin_of(int distance, int width) { return distance <= 0 ? 0 : (distance - 1) / width; }

std::vector<ArgItem> argument_items(const EventPrediction& p, ArgumentMode mode, int bin_width) {
  std::vector<ArgItem> items;
  for (const auto& a : p.arguments) {
    if (a.trigger_idx < 0 || a.trigger_idx >= static_cast<int>(p.triggers.size())) {
      throw EvaluationError("argument references missing trigger in '" + p.sentence_id + "'");
    }
    const auto& subtype = p.triggers[static_cast<std::size_t>(a.trigger_idx)].subtype;
    items.push_back({{subtype, a.span, mode == ArgumentMode::kRole ? a.role : std::string()},
                     bin_of(distance_of(p, a), bin_width)});
  }
  return items;
}

// Greedy one-to-one matching in prediction order. A gold item in the same
// bin is preferred, so per-bin counts add up to the unbinned ones. Returns
// the matched flag per prediction.
std::vector<bool> match(const std::vector<ArgItem>& pred, const std::vector<ArgItem>& gold) {
  std::vector<bool> used(gold.size(), false);
  std::vector<bool> hit(pred.size(), false);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::ptrdiff_t pick = -1;
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (used[g] || gold[g].key != pred[i].key) continue;
      if (gold[g].bin == pred[i].bin) {
        pick = static_cast<std::ptrdiff_t>(g);
        break;
      }
      if (pick < 0) pick = static_cast<std::ptrdiff_t>(g);
    }
    if (pick >= 0) {
      used[static_cast<std::size_t>(pick)] = true;
      hit[i] = true;
    }
  }
  return hit;
}

}  // namespace

ScoreReport score_triggers(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold) {
  check_aligned(pred, gold);
  ScoreReport r;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const auto& ps = pred[s].triggers;
    const auto& gs = gold[s].triggers;
    r.predicted += static_cast<long>(ps.size());
    r.gold += static_cast<long>(gs.size());
    std::vector<bool> used(gs.size(), false);
    for (const auto& p : ps) {
      for (std::size_t g = 0; g < gs.size(); ++g) {
        if (!used[g] && gs[g].span == p.span && gs[g].subtype == p.subtype) {
          used[g] = true;
          ++r.correct;
          break;
        }
      }
    }
  }
  return r;
}

ScoreReport score_arguments(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold,
                            ArgumentMode mode) {
  check_aligned(pred, gold);
  ScoreReport r;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const auto p = argument_items(pred[s], mode, 3);
    const auto g = argument_items(gold[s], mode, 3);
    r.predicted += static_cast<long>(p.size());
    r.gold += static_cast<long>(g.size());
    for (bool h : match(p, g)) r.correct += h ? 1 : 0;
  }
  return r;
}

EventScores score_all(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold) {
  return {score_triggers(pred, gold), score_arguments(pred, gold, ArgumentMode::kIdentification),
          score_arguments(pred, gold, ArgumentMode::kRole)};
}

OneVsManySplit split_one_vs_many(const std::vector<EventPrediction>& gold) {
  OneVsManySplit out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto n = gold[i].triggers.size();
    if (n == 0) {
      out.excluded.push_back(i);
    } else if (n == 1) {
      out.one_event.push_back(i);
    } else {
      out.multi_event.push_back(i);
    }
  }
  return out;
}

OneVsManySplit split_one_vs_many(const Corpus& corpus) { return split_one_vs_many(gold_events(corpus)); }

std::vector<DistanceBin> distance_bin_report(const std::vector<EventPrediction>& pred,
                                             const std::vector<EventPrediction>& gold, int bin_width) {
  check_aligned(pred, gold);
  if (bin_width <= 0) throw EvaluationError("bin width must be positive");
  std::map<int, ScoreReport> bins;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const auto p = argument_items(pred[s], ArgumentMode::kRole, bin_width);
    const auto g = argument_items(gold[s], ArgumentMode::kRole, bin_width);
    for (const auto& it : p) ++bins[it.bin].predicted;
    for (const auto& it : g) ++bins[it.bin].gold;
    const auto hit = match(p, g);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (hit[i]) ++bins[p[i].bin].correct;
    }
  }
  std::vector<DistanceBin> out;
  for (const auto& [b, r] : bins) out.push_back({b * bin_width + 1, (b + 1) * bin_width, r});
  return out;
}

namespace {

ordered_json report_object(const ScoreReport& r) {
  ordered_json j;
  j["predicted"] = r.predicted;
  j["gold"] = r.gold;
  j["correct"] = r.correct;
  j["precision"] = r.precision();
  j["recall"] = r.recall();
  j["f1"] = r.f1();
  return j;
}

}  // namespace

std::string report_json(const EventScores& s) {
  ordered_json j;
  j["trigger"] = report_object(s.trigger);
  j["argument_identification"] = report_object(s.identification);
  j["argument_role"] = report_object(s.role);
  return j.dump();
}

std::string report_table(const EventScores& s, const std::string& title) {
  std::ostringstream os;
  if (!title.empty()) os << title << '\n';
  os << std::left << std::setw(26) << "task" << std::right << std::setw(8) << "pred" << std::setw(8) << "gold"
     << std::setw(8) << "corr" << std::setw(10) << "P" << std::setw(10) << "R" << std::setw(10) << "F1" << '\n';
  auto row = [&](const char* name, const ScoreReport& r) {
    os << std::left << std::setw(26) << name << std::right << std::setw(8) << r.predicted << std::setw(8) << r.gold
       << std::setw(8) << r.correct << std::fixed << std::setprecision(4) << std::setw(10) << r.precision()
       << std::setw(10) << r.recall() << std::setw(10) << r.f1() << '\n';
  };
  row("trigger classification", s.trigger);
  row("argument identification", s.identification);
  row("argument role", s.role);
  return os.str();
}

std::string distance_csv(const std::vector<DistanceBin>& bins) {
  std::ostringstream os;
  os << "bin,P,R,F1,support\n";
  for (const auto& b : bins) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d-%d,%.4f,%.4f,%.4f,%ld\n", b.low, b.high, b.report.precision(),
                  b.report.recall(), b.report.f1(), b.report.gold);
    os << buf;
  }
  return os.str();
}

}  // namespace jeesdp
