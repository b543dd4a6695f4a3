#include "jeesdp/model.hpp"

#include <random>

namespace jeesdp {

Model::Model(const TrainConfig& cfg, LabelVocab vocab, WordVectors words)
    : cfg_(cfg), vocab_(std::move(vocab)), words_(std::move(words)) {
  if (vocab_.trigger_subtypes().empty()) throw ConfigError("label vocabulary has no trigger subtypes");
  std::mt19937_64 rng(cfg_.seed);
  tables_ = make_embedding_tables(params_, cfg_, vocab_, words_, rng);
  const int n_d = input_width(cfg_, vocab_);
  bilstm_ = make_bilstm(params_, n_d, cfg_.lstm_hidden, rng);
  const int labels = static_cast<int>(vocab_.bio_labels().size());
  trigger_head_ = make_trigger_head(params_, 2 * cfg_.lstm_hidden, cfg_.trigger_hidden, labels, rng);
  dmcnn_ = make_dmcnn(params_, pair_width(), cfg_.filters, cfg_.window, rng);
  const int n_o = feature_width();
  if (cfg_.gcn) gcn_ = make_gcn_sdp(params_, n_o, cfg_.max_sdp_length, cfg_.init_scale, rng);
  const int head_in = cfg_.gcn ? 2 * n_o : n_o;
  role_head_ = make_output_head(params_, "role", head_in, cfg_.role_hidden, num_roles(), rng);
  if (cfg_.identification_head) {
    ident_head_ = make_output_head(params_, "ident", head_in, cfg_.identification_hidden, 2, rng);
  }
}

int Model::pair_width() const {
  return 2 * cfg_.lstm_hidden + static_cast<int>(vocab_.bio_labels().size()) + 2 * cfg_.position_dim;
}

int Model::feature_width() const { return 3 * cfg_.filters + cfg_.sdp_length_dim + cfg_.argument_type_dim; }

EncodedSentence Model::encode(const Sentence& raw, const ContextualVectors* contextual) const {
  EncodedSentence e;
  const int L = cfg_.max_length;
  e.sentence = normalize_length(raw, L);
  e.features = sentence_features(e.sentence, vocab_, words_, cfg_, contextual, raw.real_length());
  e.gold_bio = encode_bio(e.sentence, vocab_);

  std::vector<Span> entity_spans;
  for (const auto& ent : e.sentence.entities) {
    const auto t = vocab_.entity_type_index(ent.etype);
    if (!t) throw CorpusError("unknown entity type '" + ent.etype + "' in sentence '" + raw.id + "'");
    entity_spans.push_back(ent.span);
    e.entity_types.push_back(*t);
  }
  e.entity_mask = candidate_mask(entity_spans, L);
  e.paths = bfs_all_pairs(dependency_graph(e.sentence));
  e.argument_sdp_l = compute_argument_sdp_l(e.paths, e.entity_mask);
  e.argument_levels = decompose_sdp_l<Scalar>(e.argument_sdp_l, cfg_.max_sdp_length);

  std::vector<Span> trigger_spans;
  for (const auto& t : e.sentence.triggers) trigger_spans.push_back(t.span);
  e.gold_sdp = compute_sdp(e.paths, candidate_mask(trigger_spans, L), e.entity_mask);

  e.gold_roles = IntMatrix::Zero(e.num_triggers(), e.num_entities());
  for (const auto& a : e.sentence.arguments) {
    int j = 0;
    while (j < e.num_entities() && e.sentence.entities[static_cast<std::size_t>(j)].id != a.entity_id) ++j;
    if (j == e.num_entities()) throw CorpusError("argument references missing entity '" + a.entity_id + "'");
    const auto r = vocab_.role_index(a.role);
    if (!r) throw CorpusError("unknown role '" + a.role + "' in sentence '" + raw.id + "'");
    e.gold_roles(a.trigger_idx, j) = *r;
  }
  return e;
}

TriggerForward Model::trigger_forward(Tape& tape, const EncodedSentence& s, bool train) const {
  auto x = assemble_sentence_matrix(tape, tables_, s.features, cfg_);
  TriggerForward out;
  out.encoded = bilstm_forward(tape, bilstm_, x, s.real_length());
  out.probs = trigger_output(tape, trigger_head_, out.encoded, cfg_.dropout, train);
  return out;
}

ArgumentForward Model::argument_forward(Tape& tape, const EncodedSentence& s, const TriggerForward& trig,
                                        const Span& trigger, const IntMatrix& sdp, const IntVector& sdp_len,
                                        bool train) const {
  const int L = cfg_.max_length;
  const int n = s.real_length();
  ArgumentForward out;
  Var y = trig.probs;
  if (cfg_.hard_trigger_onehot) {
    Matrixd onehot = Matrixd::Zero(L, trig.probs.cols());
    const auto labels = argmax_labels(trig.probs.value(), n);
    for (int k = 0; k < n; ++k) onehot(k, labels[static_cast<std::size_t>(k)]) = 1.0;
    y = tape.constant(std::move(onehot));
  }
  IntVector pad_mask = IntVector::Zero(L);
  pad_mask.head(n).setOnes();

  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(s.num_entities()));
  for (int j = 0; j < s.num_entities(); ++j) {
    const auto& arg = s.sentence.entities[static_cast<std::size_t>(j)].span;
    auto h = build_pair_input(tape, trig.encoded, y, tables_, trigger, arg, n, L);
    auto masked = apply_sdp_mask(tape, h, cfg_.sdp_mask ? IntVector(sdp.row(j)) : pad_mask);
    auto pooled = dmcnn_forward(tape, dmcnn_, masked, trigger.start, arg.start, n);
    rows.push_back(pair_feature(tape, tables_, pooled, sdp_len(j), s.entity_types[static_cast<std::size_t>(j)]));
  }
  out.features = rows.size() == 1 ? rows.front() : ad::concat_rows(rows);
  if (cfg_.gcn) {
    auto g = gcn_sdp_forward(tape, gcn_, s.argument_levels, out.features, cfg_.attention);
    out.graph = g.aggregated;
    out.scores = g.scores;
  }
  out.role_probs = role_output(tape, role_head_, out.features, out.graph, cfg_.dropout, train);
  if (cfg_.identification_head) {
    out.ident_probs = role_output(tape, ident_head_, out.features, out.graph, cfg_.dropout, train);
  }
  return out;
}

EventPrediction Model::predict(const EncodedSentence& s) const {
  Tape tape;
  EventPrediction pred;
  pred.sentence_id = s.sentence.id;
  const auto trig = trigger_forward(tape, s, false);
  pred.triggers = decode_bio(argmax_labels(trig.probs.value(), s.real_length()), vocab_);
  if (pred.triggers.empty() || s.num_entities() == 0) return pred;

  std::vector<Span> spans;
  for (const auto& t : pred.triggers) spans.push_back(t.span);
  const auto sdp = compute_sdp(s.paths, candidate_mask(spans, cfg_.max_length), s.entity_mask);
  for (int t = 0; t < static_cast<int>(pred.triggers.size()); ++t) {
    const auto arg = argument_forward(tape, s, trig, pred.triggers[static_cast<std::size_t>(t)].span,
                                      sdp.sdp[static_cast<std::size_t>(t)], sdp.sdp_len.row(t), false);
    const auto roles = argmax_labels(arg.role_probs.value(), s.num_entities());
    std::vector<int> ident;
    if (cfg_.identification_head) ident = argmax_labels(arg.ident_probs.value(), s.num_entities());
    for (int j = 0; j < s.num_entities(); ++j) {
      const int r = roles[static_cast<std::size_t>(j)];
      if (r == 0) continue;
      if (cfg_.identification_head && ident[static_cast<std::size_t>(j)] == 0) continue;
      const auto& ent = s.sentence.entities[static_cast<std::size_t>(j)];
      pred.arguments.push_back({t, ent.span, ent.id, vocab_.roles()[static_cast<std::size_t>(r)]});
    }
  }
  return pred;
}

void Model::round_to_float32() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& v = params_[i].value;
    v = v.cast<float>().cast<Scalar>();
  }
}

}  // namespace jeesdp
