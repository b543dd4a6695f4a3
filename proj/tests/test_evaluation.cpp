#include <sstream>

#include "doctest.h"
#include "jeesdp/evaluation.hpp"
#include "jeesdp/synthetic.hpp"
#include "support.hpp"

using namespace jeesdp;

namespace {

EventPrediction events(const std::string& id, std::vector<TriggerMention> t, std::vector<PredictedArgument> a = {}) {
  return {id, std::move(t), std::move(a)};
}

}  // namespace

TEST_CASE("identical predictions score one") {
  const auto gold = gold_events(synthetic_corpus());
  const auto s = score_all(gold, gold);
  CHECK(s.trigger.f1() == 1.0);
  CHECK(s.identification.f1() == 1.0);
  CHECK(s.role.f1() == 1.0);
  CHECK(s.trigger.precision() == 1.0);
  CHECK(s.role.recall() == 1.0);
}

TEST_CASE("empty inputs are zero-safe") {
  const auto s = score_all({}, {});
  CHECK(s.trigger.f1() == 0.0);
  CHECK(s.trigger.precision() == 0.0);
  CHECK(distance_bin_report({}, {}).empty());
}

TEST_CASE("two predicted, one gold, one correct") {
  const std::vector<EventPrediction> gold = {events("a", {{{2, 3}, "Attack"}})};
  const std::vector<EventPrediction> pred = {events("a", {{{2, 3}, "Attack"}, {{5, 6}, "Die"}})};
  const auto r = score_triggers(pred, gold);
  CHECK(r.predicted == 2);
  CHECK(r.gold == 1);
  CHECK(r.correct == 1);
  CHECK(r.precision() == 0.5);
  CHECK(r.recall() == 1.0);
  CHECK(r.f1() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("trigger matching needs span and subtype") {
  const std::vector<EventPrediction> gold = {events("a", {{{2, 3}, "Attack"}})};
  CHECK(score_triggers({events("a", {{{2, 3}, "Die"}})}, gold).correct == 0);
  CHECK(score_triggers({events("a", {{{2, 4}, "Attack"}})}, gold).correct == 0);
  // A duplicate prediction matches only once.
  const auto dup = score_triggers({events("a", {{{2, 3}, "Attack"}, {{2, 3}, "Attack"}})}, gold);
  CHECK(dup.correct == 1);
  CHECK(dup.predicted == 2);
}

TEST_CASE("identification versus role") {
  const std::vector<EventPrediction> gold = {
      events("a", {{{1, 2}, "Attack"}}, {{0, {3, 4}, "e1", "Target"}, {0, {5, 6}, "e2", "Place"}})};
  SUBCASE("wrong role counts only for identification") {
    const std::vector<EventPrediction> pred = {
        events("a", {{{1, 2}, "Attack"}}, {{0, {3, 4}, "e1", "Agent"}, {0, {5, 6}, "e2", "Place"}})};
    CHECK(score_arguments(pred, gold, ArgumentMode::kIdentification).correct == 2);
    CHECK(score_arguments(pred, gold, ArgumentMode::kRole).correct == 1);
  }
  SUBCASE("hosting trigger of the wrong subtype fails both") {
    const std::vector<EventPrediction> pred = {
        events("a", {{{1, 2}, "Die"}}, {{0, {3, 4}, "e1", "Target"}})};
    CHECK(score_arguments(pred, gold, ArgumentMode::kIdentification).correct == 0);
    CHECK(score_arguments(pred, gold, ArgumentMode::kRole).correct == 0);
  }
  SUBCASE("role correct never exceeds identification correct") {
    std::mt19937_64 rng(3);
    const char* roles[] = {"Target", "Place", "Agent"};
    const char* subtypes[] = {"Attack", "Die"};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<PredictedArgument> args;
      for (int k = 0; k < 4; ++k) {
        const int start = std::uniform_int_distribution<int>(2, 6)(rng);
        args.push_back({0, {start, start + 1}, "e", roles[std::uniform_int_distribution<int>(0, 2)(rng)]});
      }
      const std::vector<EventPrediction> pred = {
          events("a", {{{1, 2}, subtypes[std::uniform_int_distribution<int>(0, 1)(rng)]}}, args)};
      const auto id = score_arguments(pred, gold, ArgumentMode::kIdentification);
      const auto role = score_arguments(pred, gold, ArgumentMode::kRole);
      CHECK(role.correct <= id.correct);
      CHECK(id.correct <= std::min(id.predicted, id.gold));
    }
  }
}

TEST_CASE("misaligned sets are rejected") {
  const std::vector<EventPrediction> gold = {events("a", {}), events("b", {})};
  CHECK_THROWS_AS(score_triggers({events("a", {})}, gold), EvaluationError);
  CHECK_THROWS_WITH_AS(score_triggers({events("a", {}), events("c", {})}, gold), doctest::Contains("id mismatch"),
                       EvaluationError);
}

TEST_CASE("one versus many split") {
  Corpus c(4);
  c[0].id = "one";
  c[0].triggers = {{{0, 1}, "Die"}};
  c[1] = testing::running_example();
  c[2].id = "none";
  c[3].id = "two";
  c[3].triggers = {{{0, 1}, "Die"}, {{2, 3}, "Attack"}};
  const auto split = split_one_vs_many(c);
  CHECK(split.one_event == std::vector<std::size_t>{0});
  CHECK(split.multi_event == std::vector<std::size_t>{1, 3});
  CHECK(split.excluded == std::vector<std::size_t>{2});

  const auto fixture = synthetic_corpus();
  const auto s = split_one_vs_many(fixture);
  std::vector<int> seen(fixture.size(), 0);
  for (const auto* bucket : {&s.one_event, &s.multi_event, &s.excluded}) {
    for (auto i : *bucket) ++seen[i];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));
}

TEST_CASE("distance bins") {
  SUBCASE("trigger at 4, argument at 19") {
    const std::vector<EventPrediction> gold = {events("a", {{{4, 5}, "Transport"}}, {{0, {19, 20}, "e", "Place"}})};
    const auto bins = distance_bin_report(gold, gold);
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].low == 13);
    CHECK(bins[0].high == 15);
    CHECK(bins[0].report.f1() == 1.0);
  }
  SUBCASE("adjacent pair") {
    const std::vector<EventPrediction> gold = {events("a", {{{4, 5}, "Transport"}}, {{0, {3, 4}, "e", "Place"}})};
    const auto bins = distance_bin_report(gold, gold);
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].low == 1);
    CHECK(bins[0].high == 3);
  }
  SUBCASE("per-bin counts sum to the unbinned role counts") {
    const auto corpus = synthetic_corpus();
    const auto gold = gold_events(corpus);
    auto pred = gold;
    std::mt19937_64 rng(4);
    for (auto& p : pred) {
      for (auto& a : p.arguments) {
        if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) a.role = "Agent";
      }
      if (!p.arguments.empty() && std::uniform_int_distribution<int>(0, 2)(rng) == 0) p.arguments.pop_back();
    }
    const auto whole = score_arguments(pred, gold, ArgumentMode::kRole);
    ScoreReport total;
    for (const auto& b : distance_bin_report(pred, gold)) total += b.report;
    CHECK(total.predicted == whole.predicted);
    CHECK(total.gold == whole.gold);
    CHECK(total.correct == whole.correct);
  }
}

TEST_CASE("reports") {
  const std::vector<EventPrediction> gold = {events("a", {{{2, 3}, "Attack"}})};
  const std::vector<EventPrediction> pred = {events("a", {{{2, 3}, "Attack"}, {{5, 6}, "Die"}})};
  const auto s = score_all(pred, gold);
  const auto table = report_table(s);
  CHECK(table.find("0.5000") != std::string::npos);
  CHECK(table.find("0.6667") != std::string::npos);
  const auto json = report_json(s);
  CHECK(json.find("\"trigger\"") != std::string::npos);
  CHECK(json.find("\"argument_role\"") != std::string::npos);
  const auto csv = distance_csv(distance_bin_report(gold, gold));
  CHECK(csv.rfind("bin,P,R,F1,support", 0) == 0);
}

TEST_CASE("prediction json round-trip") {
  const auto gold = gold_events(synthetic_corpus());
  std::ostringstream out;
  write_predictions(out, gold);
  std::istringstream in(out.str());
  CHECK(read_predictions(in) == gold);
}
