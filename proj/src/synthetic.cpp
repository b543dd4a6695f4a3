#include "jeesdp/synthetic.hpp"

#include <array>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "jeesdp/tensor.hpp"

namespace jeesdp {

namespace {

const std::vector<std::string> kPeople = {"Smith", "Jones", "Ahmed", "Lee", "Garcia", "Kim", "Novak", "Silva"};
const std::vector<std::string> kGroups = {"army", "rebels", "police", "militia", "guards"};
const std::vector<std::string> kPlaces = {"Baghdad", "Paris", "Kabul", "Cairo", "Lima", "Oslo"};
const std::vector<std::string> kWeapons = {"rifles", "bombs", "tanks", "missiles"};
const std::vector<std::string> kDays = {"Monday", "Tuesday", "Friday", "Sunday"};

const std::vector<std::string> kAttackVerbs = {"attacked", "bombed", "raided", "shelled"};
const std::vector<std::string> kKillVerbs = {"killed", "murdered"};
const std::vector<std::string> kDieVerbs = {"died", "perished"};
const std::vector<std::string> kMeetVerbs = {"met", "visited"};
const std::vector<std::string> kMoveVerbs = {"traveled", "moved", "flew"};
const std::vector<std::string> kQuietVerbs = {"said", "spoke", "slept"};

class Builder {
 public:
  explicit Builder(std::mt19937_64& rng) : rng_(rng) {}

  std::size_t pick(std::size_t n) {
    const auto k = static_cast<std::size_t>(ad::uniform01(rng_) * static_cast<double>(n));
    return k < n ? k : n - 1;
  }
  const std::string& pick(const std::vector<std::string>& v) { return v[pick(v.size())]; }
  bool coin(double p) { return ad::uniform01(rng_) < p; }

  int token(const std::string& text, const std::string& pos, const std::string& rel) {
    s.tokens.push_back({text, pos, kRootHead, rel});
    return s.size() - 1;
  }
  void attach(int dependent, int head) { s.tokens[static_cast<std::size_t>(dependent)].dep_head = head; }

  std::string entity(Span span, const std::string& etype) {
    const std::string id = "e" + std::to_string(s.entities.size());
    s.entities.push_back({id, span, etype});
    return id;
  }

  // Appends a noun phrase and returns the head token; the phrase attaches to
  // nothing yet. `rel` labels the head's arc.
  int noun_phrase(const std::string& etype, const std::string& rel, std::string* id) {
    int head = 0;
    Span span;
    if (etype == "Organization") {
      const int det = token("the", "DT", "det");
      head = token(pick(kGroups), "NN", rel);
      attach(det, head);
      span = {det, head + 1};
    } else if (etype == "Person") {
      head = token(pick(kPeople), "NNP", rel);
      span = {head, head + 1};
    } else if (etype == "Geo-political") {
      head = token(pick(kPlaces), "NNP", rel);
      span = {head, head + 1};
    } else if (etype == "Weapon") {
      head = token(pick(kWeapons), "NNS", rel);
      span = {head, head + 1};
    } else {
      head = token(pick(kDays), "NNP", rel);
      span = {head, head + 1};
    }
    *id = entity(span, etype);
    return head;
  }

  // "<prep> X" attached to `governor`.
  std::string prep_phrase(const std::string& prep, const std::string& etype, int governor) {
    const int case_tok = token(prep, "IN", "case");
    std::string id;
    const int head = noun_phrase(etype, "nmod", &id);
    attach(case_tok, head);
    attach(head, governor);
    return id;
  }

  Sentence s;

 private:
  std::mt19937_64& rng_;
};

struct Link {
  std::string entity_id;
  std::string role;
};

// Appends one clause and returns its verb token. `subtype` empty means a
// clause without an event.
int clause(Builder& b, const std::string& subtype, std::vector<Link>& links) {
  auto subject = [&](const std::string& etype, const std::string& role) {
    std::string id;
    const int head = b.noun_phrase(etype, "nsubj", &id);
    if (!role.empty()) links.push_back({id, role});
    // Distractor modifier on the subject.
    if (b.coin(0.2)) b.prep_phrase("of", "Geo-political", head);
    return head;
  };
  auto optional_tail = [&](int verb, bool weapon, double p) {
    if (weapon && b.coin(p)) links.push_back({b.prep_phrase("with", "Weapon", verb), "Instrument"});
    if (b.coin(p)) links.push_back({b.prep_phrase("in", "Geo-political", verb), "Place"});
    if (b.coin(p)) links.push_back({b.prep_phrase("on", "Time", verb), "Time"});
  };

  if (subtype.empty()) {
    const int subj = subject("Person", "");
    const int verb = b.token(b.pick(kQuietVerbs), "VBD", "root");
    b.attach(subj, verb);
    if (b.coin(0.6)) b.prep_phrase("in", "Geo-political", verb);
    return verb;
  }
  if (subtype == "Attack") {
    const int subj = subject(b.coin(0.5) ? "Person" : "Organization", "Agent");
    const int verb = b.token(b.pick(kAttackVerbs), "VBD", "root");
    b.attach(subj, verb);
    std::string id;
    const auto target_type = std::array<const char*, 3>{"Person", "Organization", "Geo-political"}[b.pick(3)];
    const int obj = b.noun_phrase(target_type, "dobj", &id);
    b.attach(obj, verb);
    links.push_back({id, "Target"});
    optional_tail(verb, true, 0.4);
    return verb;
  }
  if (subtype == "Die") {
    if (b.coin(0.5)) {
      const int subj = subject("Person", "Target");
      const int verb = b.token(b.pick(kDieVerbs), "VBD", "root");
      b.attach(subj, verb);
      optional_tail(verb, false, 0.5);
      return verb;
    }
    const int subj = subject(b.coin(0.5) ? "Person" : "Organization", "Agent");
    const int verb = b.token(b.pick(kKillVerbs), "VBD", "root");
    b.attach(subj, verb);
    std::string id;
    const int obj = b.noun_phrase("Person", "dobj", &id);
    b.attach(obj, verb);
    links.push_back({id, "Target"});
    optional_tail(verb, true, 0.3);
    return verb;
  }
  if (subtype == "Meet") {
    const int subj = subject("Person", "Agent");
    const int verb = b.token(b.pick(kMeetVerbs), "VBD", "root");
    b.attach(subj, verb);
    std::string id;
    const int obj = b.noun_phrase("Person", "dobj", &id);
    b.attach(obj, verb);
    links.push_back({id, "Agent"});
    optional_tail(verb, false, 0.4);
    return verb;
  }
  // Transport
  const int subj = subject(b.coin(0.6) ? "Person" : "Organization", "Agent");
  const int verb = b.token(b.pick(kMoveVerbs), "VBD", "root");
  b.attach(subj, verb);
  if (b.coin(0.4)) b.prep_phrase("from", "Geo-political", verb);
  links.push_back({b.prep_phrase("to", "Geo-political", verb), "Place"});
  if (b.coin(0.4)) links.push_back({b.prep_phrase("on", "Time", verb), "Time"});
  return verb;
}

const std::vector<std::string> kSubtypes = {"Attack", "Die", "Meet", "Transport"};

Sentence generate(std::mt19937_64& rng, int index) {
  Builder b(rng);
  // Clause plan: 0 = no event; about half the sentences carry two or more events.
  std::vector<std::string> plan;
  const auto shape = b.pick(10);
  const auto event = [&] { return kSubtypes[b.pick(kSubtypes.size())]; };
  if (shape == 0) {
    plan = {""};
  } else if (shape <= 4) {
    plan = {event()};
  } else if (shape <= 8) {
    plan = {event(), event()};
  } else {
    plan = {event(), event(), event()};
  }
  int first_verb = -1;
  for (std::size_t c = 0; c < plan.size(); ++c) {
    int conj = -1;
    if (c > 0) conj = b.token("and", "CC", "cc");
    std::vector<Link> links;
    const int verb = clause(b, plan[c], links);
    if (c == 0) {
      first_verb = verb;
    } else {
      b.attach(conj, verb);
      b.attach(verb, first_verb);
      b.s.tokens[static_cast<std::size_t>(verb)].dep_rel = "conj";
    }
    if (!plan[c].empty()) {
      const int t = static_cast<int>(b.s.triggers.size());
      b.s.triggers.push_back({{verb, verb + 1}, plan[c]});
      for (const auto& l : links) b.s.arguments.push_back({t, l.entity_id, l.role});
    }
  }
  char id[32];
  std::snprintf(id, sizeof(id), "syn-%03d", index);
  b.s.id = id;
  return b.s;
}

}  // namespace

Corpus synthetic_corpus(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  Corpus out;
  while (static_cast<int>(out.size()) < options.sentences) {
    auto s = generate(rng, static_cast<int>(out.size()));
    if (s.size() <= options.max_tokens) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace jeesdp
