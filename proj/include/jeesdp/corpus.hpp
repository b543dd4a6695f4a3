// Annotated sentences, JSON Lines ingestion, and the BIO trigger codec.
#ifndef JEESDP_CORPUS_HPP_
#define JEESDP_CORPUS_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace jeesdp {

inline constexpr int kRootHead = -1;
inline constexpr int kMaxSentenceLength = 50;

inline const std::string kPadSymbol = "<PAD>";
inline const std::string kNoRole = "NoRole";
inline const std::string kOutsideLabel = "O";

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-open token range [start, end).
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool contains(int k) const { return k >= start && k < end; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Token {
  std::string text;
  std::string pos;
  int dep_head = kRootHead;  // kRootHead or a token index
  std::string dep_rel;
  friend bool operator==(const Token&, const Token&) = default;
};

struct EntityMention {
  std::string id;
  Span span;
  std::string etype;
  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

struct TriggerMention {
  Span span;
  std::string subtype;
  friend bool operator==(const TriggerMention&, const TriggerMention&) = default;
};

struct ArgumentLink {
  int trigger_idx = 0;
  std::string entity_id;
  std::string role;
  friend bool operator==(const ArgumentLink&, const ArgumentLink&) = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<EntityMention> entities;
  std::vector<TriggerMention> triggers;
  std::vector<ArgumentLink> arguments;
  // 1 for real tokens, 0 for padding; empty before normalize_length().
  std::vector<std::uint8_t> pad_mask;

  int size() const { return static_cast<int>(tokens.size()); }
  // Number of non-pad tokens.
  int real_length() const;
  const EntityMention* find_entity(const std::string& entity_id) const;
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Corpus = std::vector<Sentence>;

// Ordered label inventories. Indices are positions in each list.
class LabelVocab {
 public:
  LabelVocab() = default;
  // `roles` excludes NoRole; it is always placed at index 0.
  LabelVocab(std::vector<std::string> trigger_subtypes, std::vector<std::string> roles,
             std::vector<std::string> entity_types, std::vector<std::string> pos_tags,
             std::vector<std::string> dep_rels);

  // The ACE 2005 inventory: 33 event subtypes and 35 roles.
  static LabelVocab ace2005();

  const std::vector<std::string>& trigger_subtypes() const { return subtypes_; }
  // O, then B-x, I-x for every subtype in order.
  const std::vector<std::string>& bio_labels() const { return bio_; }
  const std::vector<std::string>& roles() const { return roles_; }
  const std::vector<std::string>& entity_types() const { return entity_types_; }
  const std::vector<std::string>& pos_tags() const { return pos_tags_; }
  const std::vector<std::string>& dep_rels() const { return dep_rels_; }

  std::optional<int> subtype_index(const std::string& s) const { return lookup(subtype_idx_, s); }
  std::optional<int> role_index(const std::string& s) const { return lookup(role_idx_, s); }
  std::optional<int> entity_type_index(const std::string& s) const { return lookup(etype_idx_, s); }
  std::optional<int> pos_index(const std::string& s) const { return lookup(pos_idx_, s); }
  std::optional<int> dep_rel_index(const std::string& s) const { return lookup(dep_idx_, s); }

  int begin_label(int subtype) const { return 1 + 2 * subtype; }
  int inside_label(int subtype) const { return 2 + 2 * subtype; }

  bool empty() const { return subtypes_.empty() && entity_types_.empty() && roles_.size() <= 1; }
  friend bool operator==(const LabelVocab& a, const LabelVocab& b) {
    return a.subtypes_ == b.subtypes_ && a.roles_ == b.roles_ &&
           a.entity_types_ == b.entity_types_ && a.pos_tags_ == b.pos_tags_ &&
           a.dep_rels_ == b.dep_rels_;
  }

 private:
  using Index = std::unordered_map<std::string, int>;
  static std::optional<int> lookup(const Index& m, const std::string& s) {
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }
  static Index make_index(const std::vector<std::string>& v);

  std::vector<std::string> subtypes_, bio_, roles_{kNoRole}, entity_types_, pos_tags_, dep_rels_;
  Index subtype_idx_, role_idx_{{kNoRole, 0}}, etype_idx_, pos_idx_, dep_idx_;
};

// Label vocabulary built from every label observed in `corpus`, each list
// sorted lexicographically.
LabelVocab build_vocab(const Corpus& corpus);

struct LoadedCorpus {
  Corpus sentences;
  LabelVocab vocab;
};

// Reads JSON Lines. With vocab = nullptr the vocabulary is built from the
// file (AUTO); otherwise unknown trigger subtypes, roles, and entity types are
// errors. POS tags and dependency labels outside a fixed vocab are allowed
// and map to the UNK embedding row.
LoadedCorpus load_corpus(const std::string& path, const LabelVocab* vocab = nullptr);
LoadedCorpus parse_corpus(std::istream& in, const LabelVocab* vocab = nullptr);

// Parses one record; throws CorpusError (without line information).
Sentence parse_sentence(const std::string& json_line);
// Checks the structural invariants of an unpadded sentence.
void validate_sentence(const Sentence& s, const LabelVocab* vocab);

// One JSON object per line, in the same schema load_corpus reads. Pads are
// not written.
void write_corpus(std::ostream& out, const Corpus& corpus);
std::string sentence_to_json(const Sentence& s);

// Pads or truncates to exactly `length` tokens. Pad tokens carry the PAD
// symbol in every field and head to themselves. Mentions that do not fit are
// dropped together with arguments that reference them.
Sentence normalize_length(Sentence s, int length = kMaxSentenceLength);

// One label index per token: B-x on the first token of a trigger, I-x on the
// rest, O elsewhere. Throws CorpusError on overlapping triggers.
std::vector<int> encode_bio(const Sentence& s, const LabelVocab& vocab);

// Runs B-x (I-x)* become triggers; a stray I-x opens a new trigger.
std::vector<TriggerMention> decode_bio(std::span<const int> labels, const LabelVocab& vocab);

// Row k sums the one-hot type vectors of every mention covering token k.
Eigen::MatrixXd entity_multihot(const Sentence& s, const LabelVocab& vocab);

}  // namespace jeesdp

#endif  // JEESDP_CORPUS_HPP_
