#include "jeesdp/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace jeesdp {

using nlohmann::json;
using nlohmann::ordered_json;

int Sentence::real_length() const {
  if (pad_mask.empty()) return size();
  return static_cast<int>(std::count(pad_mask.begin(), pad_mask.end(), 1));
}

const EntityMention* Sentence::find_entity(const std::string& entity_id) const {
  for (const auto& e : entities) {
    if (e.id == entity_id) return &e;
  }
  return nullptr;
}

LabelVocab::Index LabelVocab::make_index(const std::vector<std::string>& v) {
  Index m;
  for (std::size_t i = 0; i < v.size(); ++i) m.emplace(v[i], static_cast<int>(i));
  return m;
}

LabelVocab::LabelVocab(std::vector<std::string> trigger_subtypes, std::vector<std::string> roles,
                       std::vector<std::string> entity_types, std::vector<std::string> pos_tags,
                       std::vector<std::string> dep_rels)
    : subtypes_(std::move(trigger_subtypes)),
      entity_types_(std::move(entity_types)),
      pos_tags_(std::move(pos_tags)),
      dep_rels_(std::move(dep_rels)) {
  bio_ = {kOutsideLabel};
  for (const auto& s : subtypes_) {
    bio_.push_back("B-" + s);
    bio_.push_back("I-" + s);
  }
  roles_ = {kNoRole};
  for (auto& r : roles) {
    if (r != kNoRole) roles_.push_back(std::move(r));
  }
  subtype_idx_ = make_index(subtypes_);
  role_idx_ = make_index(roles_);
  etype_idx_ = make_index(entity_types_);
  pos_idx_ = make_index(pos_tags_);
  dep_idx_ = make_index(dep_rels_);
  if (subtype_idx_.size() != subtypes_.size() || role_idx_.size() != roles_.size() ||
      etype_idx_.size() != entity_types_.size()) {
    throw CorpusError("label vocabulary contains duplicates");
  }
}

LabelVocab LabelVocab::ace2005() {
  std::vector<std::string> subtypes = {
      "Be-Born",        "Marry",         "Divorce",      "Injure",         "Die",
      "Transport",      "Transfer-Ownership", "Transfer-Money", "Start-Org", "Merge-Org",
      "Declare-Bankruptcy", "End-Org",   "Attack",       "Demonstrate",    "Meet",
      "Phone-Write",    "Start-Position", "End-Position", "Nominate",      "Elect",
      "Arrest-Jail",    "Release-Parole", "Trial-Hearing", "Charge-Indict", "Sue",
      "Convict",        "Sentence",      "Fine",         "Execute",        "Extradite",
      "Acquit",         "Appeal",        "Pardon"};
  std::vector<std::string> roles = {
      "Person",      "Place",         "Buyer",        "Seller",        "Beneficiary",
      "Price",       "Artifact",      "Origin",       "Destination",   "Giver",
      "Recipient",   "Money",         "Org",          "Agent",         "Victim",
      "Instrument",  "Entity",        "Attacker",     "Target",        "Defendant",
      "Adjudicator", "Prosecutor",    "Plaintiff",    "Crime",         "Position",
      "Sentence",    "Vehicle",       "Time-Within",  "Time-Starting", "Time-Ending",
      "Time-Before", "Time-After",    "Time-Holds",   "Time-At-Beginning", "Time-At-End"};
  std::vector<std::string> etypes = {"Contact-Info", "Crime",    "Facility", "Geo-political",
                                     "Job-Title",    "Location", "Numeric",  "Organization",
                                     "Person",       "Sentence", "Time",     "Vehicle",
                                     "Weapon"};
  return LabelVocab(std::move(subtypes), std::move(roles), std::move(etypes), {}, {});
}

LabelVocab build_vocab(const Corpus& corpus) {
  std::set<std::string> subtypes, roles, etypes, pos, deps;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      pos.insert(t.pos);
      deps.insert(t.dep_rel);
    }
    for (const auto& e : s.entities) etypes.insert(e.etype);
    for (const auto& t : s.triggers) subtypes.insert(t.subtype);
    for (const auto& a : s.arguments) roles.insert(a.role);
  }
  auto v = [](const std::set<std::string>& s) { return std::vector<std::string>(s.begin(), s.end()); };
  return LabelVocab(v(subtypes), v(roles), v(etypes), v(pos), v(deps));
}

namespace {

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw CorpusError(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CorpusError(std::string("field '") + name + "' has the wrong type");
  }
}

std::string span_text(const Span& s) {
  return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + ")";
}

}  // namespace

Sentence parse_sentence(const std::string& json_line) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw CorpusError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw CorpusError("record is not a JSON object");

  Sentence s;
  s.id = field<std::string>(j, "id");
  const auto words = field<std::vector<std::string>>(j, "tokens");
  const auto pos = field<std::vector<std::string>>(j, "pos");
  const auto heads = field<std::vector<int>>(j, "dep_head");
  const auto rels = field<std::vector<std::string>>(j, "dep_rel");
  if (pos.size() != words.size() || heads.size() != words.size() || rels.size() != words.size()) {
    throw CorpusError("tokens, pos, dep_head and dep_rel lengths differ");
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    s.tokens.push_back({words[i], pos[i], heads[i], rels[i]});
  }
  for (const auto& e : field<json>(j, "entities")) {
    s.entities.push_back({field<std::string>(e, "id"),
                          {field<int>(e, "start"), field<int>(e, "end")},
                          field<std::string>(e, "type")});
  }
  for (const auto& t : field<json>(j, "triggers")) {
    s.triggers.push_back({{field<int>(t, "start"), field<int>(t, "end")}, field<std::string>(t, "subtype")});
  }
  for (const auto& a : field<json>(j, "arguments")) {
    s.arguments.push_back(
        {field<int>(a, "trigger_idx"), field<std::string>(a, "entity_id"), field<std::string>(a, "role")});
  }
  return s;
}

void validate_sentence(const Sentence& s, const LabelVocab* vocab) {
  const int n = s.size();
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = s.tokens[static_cast<std::size_t>(i)].dep_head;
    if (h == kRootHead) {
      ++roots;
    } else if (h < 0 || h >= n || h == i) {
      throw CorpusError("token " + std::to_string(i) + " has invalid dep_head " + std::to_string(h));
    }
  }
  if (n > 0 && roots != 1) {
    throw CorpusError("sentence must have exactly one ROOT, found " + std::to_string(roots));
  }
  auto check_span = [n](const Span& sp, const std::string& what) {
    if (sp.start < 0 || sp.start >= sp.end || sp.end > n) {
      throw CorpusError(what + " span " + span_text(sp) + " out of range for " + std::to_string(n) +
                        " tokens");
    }
  };
  std::set<std::string> ids;
  for (const auto& e : s.entities) {
    check_span(e.span, "entity '" + e.id + "'");
    if (!ids.insert(e.id).second) throw CorpusError("duplicate entity id '" + e.id + "'");
    if (vocab && !vocab->entity_type_index(e.etype)) {
      throw CorpusError("unknown entity type '" + e.etype + "'");
    }
  }
  for (const auto& t : s.triggers) {
    check_span(t.span, "trigger");
    if (vocab && !vocab->subtype_index(t.subtype)) {
      throw CorpusError("unknown trigger subtype '" + t.subtype + "'");
    }
  }
  for (const auto& a : s.arguments) {
    if (a.trigger_idx < 0 || a.trigger_idx >= static_cast<int>(s.triggers.size())) {
      throw CorpusError("argument references missing trigger " + std::to_string(a.trigger_idx));
    }
    if (ids.count(a.entity_id) == 0) {
      throw CorpusError("argument references missing entity '" + a.entity_id + "'");
    }
    if (vocab && !vocab->role_index(a.role)) throw CorpusError("unknown role '" + a.role + "'");
  }
}

LoadedCorpus parse_corpus(std::istream& in, const LabelVocab* vocab) {
  LoadedCorpus out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Sentence s = parse_sentence(line);
      validate_sentence(s, vocab);
      out.sentences.push_back(std::move(s));
    } catch (const CorpusError& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  out.vocab = vocab ? *vocab : build_vocab(out.sentences);
  return out;
}

LoadedCorpus load_corpus(const std::string& path, const LabelVocab* vocab) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, vocab);
}

std::string sentence_to_json(const Sentence& s) {
  ordered_json j;
  j["id"] = s.id;
  const int n = s.real_length();
  std::vector<std::string> words, pos, rels;
  std::vector<int> heads;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    words.push_back(t.text);
    pos.push_back(t.pos);
    heads.push_back(t.dep_head);
    rels.push_back(t.dep_rel);
  }
  j["tokens"] = words;
  j["pos"] = pos;
  j["dep_head"] = heads;
  j["dep_rel"] = rels;
  j["entities"] = ordered_json::array();
  for (const auto& e : s.entities) {
    j["entities"].push_back({{"id", e.id}, {"start", e.span.start}, {"end", e.span.end}, {"type", e.etype}});
  }
  j["triggers"] = ordered_json::array();
  for (const auto& t : s.triggers) {
    j["triggers"].push_back({{"start", t.span.start}, {"end", t.span.end}, {"subtype", t.subtype}});
  }
  j["arguments"] = ordered_json::array();
  for (const auto& a : s.arguments) {
    j["arguments"].push_back({{"trigger_idx", a.trigger_idx}, {"entity_id", a.entity_id}, {"role", a.role}});
  }
  return j.dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus) out << sentence_to_json(s) << '\n';
}

Sentence normalize_length(Sentence s, int length) {
  const int n = s.real_length();
  const int kept = std::min(n, length);
  s.tokens.resize(static_cast<std::size_t>(kept));
  for (int i = 0; i < kept; ++i) {
    auto& t = s.tokens[static_cast<std::size_t>(i)];
    // A head cut off by truncation leaves the token detached.
    if (t.dep_head >= kept) t.dep_head = i;
  }
  for (int i = kept; i < length; ++i) s.tokens.push_back({kPadSymbol, kPadSymbol, i, kPadSymbol});
  s.pad_mask.assign(static_cast<std::size_t>(length), 0);
  std::fill(s.pad_mask.begin(), s.pad_mask.begin() + kept, 1);

  std::set<std::string> dropped_entities;
  std::vector<EntityMention> entities;
  for (auto& e : s.entities) {
    if (e.span.end <= kept) {
      entities.push_back(std::move(e));
    } else {
      dropped_entities.insert(e.id);
    }
  }
  s.entities = std::move(entities);

  std::vector<int> remap(s.triggers.size(), -1);
  std::vector<TriggerMention> triggers;
  for (std::size_t i = 0; i < s.triggers.size(); ++i) {
    if (s.triggers[i].span.end <= kept) {
      remap[i] = static_cast<int>(triggers.size());
      triggers.push_back(std::move(s.triggers[i]));
    }
  }
  s.triggers = std::move(triggers);

  std::vector<ArgumentLink> args;
  for (auto& a : s.arguments) {
    if (a.trigger_idx < 0 || a.trigger_idx >= static_cast<int>(remap.size())) continue;
    const int t = remap[static_cast<std::size_t>(a.trigger_idx)];
    if (t < 0 || dropped_entities.count(a.entity_id) != 0) continue;
    a.trigger_idx = t;
    args.push_back(std::move(a));
  }
  s.arguments = std::move(args);
  return s;
}

std::vector<int> encode_bio(const Sentence& s, const LabelVocab& vocab) {
  std::vector<int> labels(static_cast<std::size_t>(s.size()), 0);
  std::vector<int> owner(labels.size(), -1);
  for (std::size_t i = 0; i < s.triggers.size(); ++i) {
    const auto& t = s.triggers[i];
    const auto sub = vocab.subtype_index(t.subtype);
    if (!sub) throw CorpusError("unknown trigger subtype '" + t.subtype + "'");
    if (t.span.start < 0 || t.span.end > s.size() || t.span.start >= t.span.end) {
      throw CorpusError("trigger span " + span_text(t.span) + " out of range");
    }
    for (int k = t.span.start; k < t.span.end; ++k) {
      const int prev = owner[static_cast<std::size_t>(k)];
      if (prev >= 0) {
        throw CorpusError("overlapping triggers " + span_text(s.triggers[static_cast<std::size_t>(prev)].span) +
                          " and " + span_text(t.span) + " in sentence '" + s.id + "'");
      }
      owner[static_cast<std::size_t>(k)] = static_cast<int>(i);
      labels[static_cast<std::size_t>(k)] = k == t.span.start ? vocab.begin_label(*sub) : vocab.inside_label(*sub);
    }
  }
  return labels;
}

std::vector<TriggerMention> decode_bio(std::span<const int> labels, const LabelVocab& vocab) {
  std::vector<TriggerMention> out;
  int open_subtype = -1;
  auto close = [&](int end) {
    if (open_subtype >= 0) out.back().span.end = end;
    open_subtype = -1;
  };
  const int n = static_cast<int>(labels.size());
  const int num_subtypes = static_cast<int>(vocab.trigger_subtypes().size());
  for (int k = 0; k < n; ++k) {
    const int lab = labels[static_cast<std::size_t>(k)];
    if (lab <= 0 || lab > 2 * num_subtypes) {
      close(k);
      continue;
    }
    const int sub = (lab - 1) / 2;
    const bool begin = (lab - 1) % 2 == 0;
    if (begin || sub != open_subtype) {
      close(k);
      out.push_back({{k, k + 1}, vocab.trigger_subtypes()[static_cast<std::size_t>(sub)]});
      open_subtype = sub;
    }
  }
  close(n);
  return out;
}

Eigen::MatrixXd entity_multihot(const Sentence& s, const LabelVocab& vocab) {
  const auto types = static_cast<Eigen::Index>(vocab.entity_types().size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.size(), types);
  for (const auto& e : s.entities) {
    const auto t = vocab.entity_type_index(e.etype);
    if (!t) throw CorpusError("unknown entity type '" + e.etype + "'");
    for (int k = std::max(0, e.span.start); k < std::min(e.span.end, s.size()); ++k) m(k, *t) += 1.0;
  }
  return m;
}

}  // namespace jeesdp
