#include "jeesdp/training.hpp"

#include <cmath>
#include <numeric>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace jeesdp {

Var cross_entropy_sum(const Var& probs, const std::vector<Eigen::Index>& gold) {
  return ad::scale(ad::sum(ad::log(ad::pick(probs, gold))), Scalar(-1));
}

namespace {

Var squared_norm_sum(Tape& tape, const Params& params) {
  Var total;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.trainable || p.is_bias) continue;
    auto w = tape.param(p);
    auto term = ad::sum(ad::mul(w, w));
    total = total.valid() ? ad::add(total, term) : term;
  }
  return total;
}

}  // namespace

Var joint_loss(const Var& trigger_probs, const std::vector<Eigen::Index>& gold_labels, const Var& role_probs,
               const std::vector<Eigen::Index>& gold_roles, const Params* params, double l2,
               const LossWeights& weights, const Var* ident_probs, const std::vector<Eigen::Index>* gold_ident) {
  auto& tape = *trigger_probs.tape();
  Var loss = ad::scale(cross_entropy_sum(trigger_probs, gold_labels),
                       Scalar(weights.trigger / static_cast<double>(gold_labels.size())));
  if (role_probs.valid() && !gold_roles.empty()) {
    loss = ad::add(loss, ad::scale(cross_entropy_sum(role_probs, gold_roles),
                                   Scalar(weights.role / static_cast<double>(gold_roles.size()))));
  }
  if (ident_probs != nullptr && gold_ident != nullptr && !gold_ident->empty()) {
    loss = ad::add(loss, ad::scale(cross_entropy_sum(*ident_probs, *gold_ident),
                                   Scalar(weights.identification / static_cast<double>(gold_ident->size()))));
  }
  if (params != nullptr && l2 > 0.0) {
    auto norm = squared_norm_sum(tape, *params);
    if (norm.valid()) loss = ad::add(loss, ad::scale(norm, Scalar(l2)));
  }
  return loss;
}

Var l2_term(Tape& tape, const Params& params, double l2) {
  auto norm = squared_norm_sum(tape, params);
  return norm.valid() ? ad::scale(norm, Scalar(l2)) : tape.constant(Matrixd::Zero(1, 1));
}

double l2_penalty(const Params& params, double l2) {
  double total = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.trainable && !p.is_bias) total += p.value.squaredNorm();
  }
  return l2 * total;
}

void add_l2_gradient(const Params& params, double l2, Grads& grads) {
  if (l2 == 0.0) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.trainable || p.is_bias) continue;
    auto& g = grads.at(p.id);
    g += (2.0 * l2) * p.value;
    for (auto r : p.frozen_rows) g.row(r).setZero();
  }
}

BatchCounts count_targets(const std::vector<const EncodedSentence*>& batch) {
  BatchCounts c;
  for (const auto* s : batch) {
    c.tokens += s->real_length();
    c.pairs += static_cast<long>(s->num_triggers()) * s->num_entities();
  }
  return c;
}

SentenceLoss sentence_loss(Tape& tape, const Model& model, const EncodedSentence& s, const BatchCounts& counts,
                           bool train, const LossWeights& weights) {
  SentenceLoss out;
  const int n = s.real_length();
  if (n == 0) return out;
  const auto trig = model.trigger_forward(tape, s, train);
  std::vector<Eigen::Index> gold(s.gold_bio.begin(), s.gold_bio.begin() + n);
  auto trig_ce = cross_entropy_sum(ad::slice_rows(trig.probs, 0, n), gold);
  out.trigger = trig_ce.item() / static_cast<double>(counts.tokens);
  out.total = ad::scale(trig_ce, Scalar(weights.trigger / static_cast<double>(counts.tokens)));

  if (s.num_entities() == 0 || s.num_triggers() == 0) return out;
  const bool ident = model.config().identification_head;
  for (int t = 0; t < s.num_triggers(); ++t) {
    const auto arg = model.argument_forward(tape, s, trig, s.sentence.triggers[static_cast<std::size_t>(t)].span,
                                            s.gold_sdp.sdp[static_cast<std::size_t>(t)], s.gold_sdp.sdp_len.row(t),
                                            train);
    std::vector<Eigen::Index> roles(static_cast<std::size_t>(s.num_entities()));
    for (int j = 0; j < s.num_entities(); ++j) roles[static_cast<std::size_t>(j)] = s.gold_roles(t, j);
    auto role_ce = cross_entropy_sum(arg.role_probs, roles);
    out.role += role_ce.item() / static_cast<double>(counts.pairs);
    out.total = ad::add(out.total, ad::scale(role_ce, Scalar(weights.role / static_cast<double>(counts.pairs))));
    if (ident) {
      std::vector<Eigen::Index> linked(roles.size());
      for (std::size_t j = 0; j < roles.size(); ++j) linked[j] = roles[j] != 0 ? 1 : 0;
      auto ident_ce = cross_entropy_sum(arg.ident_probs, linked);
      out.identification += ident_ce.item() / static_cast<double>(counts.pairs);
      out.total = ad::add(out.total, ad::scale(ident_ce, Scalar(weights.identification /
                                                                 static_cast<double>(counts.pairs))));
    }
  }
  return out;
}

Adam::Adam(const Params& params, double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.push_back(Matrixd::Zero(params[i].value.rows(), params[i].value.cols()));
    v_.push_back(Matrixd::Zero(params[i].value.rows(), params[i].value.cols()));
  }
}

void Adam::step(Params& params, const Grads& grads) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].trainable && grads.touched(i) && !grads.get(i).allFinite()) {
      throw NumericError("non-finite gradient for parameter '" + params[i].name + "'");
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (!p.trainable) continue;
    const Matrixd g = grads.get(i);
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    Matrixd update = (m_[i] / c1).array() / ((v_[i] / c2).array().sqrt() + epsilon_);
    for (auto r : p.frozen_rows) update.row(r).setZero();
    p.value -= lr_ * update;
  }
}

std::vector<EncodedSentence> encode_corpus(const Model& model, const Corpus& corpus,
                                           const ContextualVectors* contextual) {
  std::vector<EncodedSentence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(model.encode(s, contextual));
  return out;
}

namespace {

// Runs f(i) for i in [0, n) over contiguous chunks, one per worker.
template <typename F>
void parallel_chunks(std::size_t n, int threads, F f) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    f(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  const std::size_t used = std::min(workers, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(used);
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t begin = n * w / used;
    const std::size_t end = n * (w + 1) / used;
    pool.emplace_back([&, w, begin, end] {
      try {
        f(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t worker_count(std::size_t n, int threads) {
  return std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n));
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t dropout_seed(std::uint64_t seed, int epoch, std::size_t index) {
  return splitmix(splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(epoch)) ^ index);
}

// Fisher-Yates with the library's portable uniform draw, so the order does
// not depend on the standard library's shuffle.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(ad::uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

double evaluation_loss(const Model& model, const std::vector<EncodedSentence>& set) {
  std::vector<const EncodedSentence*> all;
  for (const auto& s : set) all.push_back(&s);
  const auto counts = count_targets(all);
  double total = 0.0;
  Tape tape;
  for (const auto& s : set) {
    const auto l = sentence_loss(tape, model, s, counts, false);
    total += l.trigger + l.role + l.identification;
    tape.clear();
  }
  return total + l2_penalty(model.params(), model.config().l2);
}

nlohmann::ordered_json score_fields(const EventScores& s) {
  nlohmann::ordered_json j;
  auto put = [&](const char* prefix, const ScoreReport& r) {
    const std::string p(prefix);
    j[p + "_p"] = r.precision();
    j[p + "_r"] = r.recall();
    j[p + "_f1"] = r.f1();
  };
  put("trigger", s.trigger);
  put("arg_id", s.identification);
  put("role", s.role);
  return j;
}

}  // namespace

std::vector<EventPrediction> predict_corpus(const Model& model, const std::vector<EncodedSentence>& sentences,
                                            int threads) {
  std::vector<EventPrediction> out(sentences.size());
  parallel_chunks(sentences.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = model.predict(sentences[i]);
  });
  return out;
}

std::vector<EventPrediction> predict_corpus(const Model& model, const Corpus& corpus,
                                            const ContextualVectors* contextual, int threads) {
  return predict_corpus(model, encode_corpus(model, corpus, contextual), threads);
}

TrainResult train(const Corpus& train_set, const Corpus& dev_set, const TrainConfig& cfg, LabelVocab vocab,
                  WordVectors words, const TrainOptions& options) {
  if (train_set.empty()) throw TrainingError("training corpus is empty");
  if (cfg.batch_size <= 0) throw TrainingError("batch_size must be positive");
  TrainResult result;
  result.model = std::make_unique<Model>(cfg, std::move(vocab), std::move(words));
  Model& model = *result.model;
  auto& params = model.params();

  const auto train_enc = encode_corpus(model, train_set, options.contextual);
  const bool has_dev = !dev_set.empty();
  const auto dev_enc = has_dev ? encode_corpus(model, dev_set, options.contextual) : std::vector<EncodedSentence>{};
  const auto& select_enc = has_dev ? dev_enc : train_enc;
  std::vector<EventPrediction> select_gold;
  for (const auto& s : select_enc) select_gold.push_back(gold_events(s.sentence));

  Adam adam(params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
  std::mt19937_64 order_rng(splitmix(cfg.seed ^ 0x5eedULL));
  std::vector<std::size_t> order(train_enc.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Matrixd> best_values;
  std::tuple<double, double> best_key{-1.0, -1.0};
  int since_best = 0;

  auto emit = [&](const nlohmann::ordered_json& j) {
    result.metrics_lines.push_back(j.dump());
    if (options.on_metrics) options.on_metrics(result.metrics_lines.back());
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, order_rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const EncodedSentence*> batch;
      for (std::size_t i = b; i < e; ++i) batch.push_back(&train_enc[order[i]]);
      const auto counts = count_targets(batch);

      const auto workers = worker_count(batch.size(), cfg.threads);
      std::vector<Grads> grads;
      for (std::size_t w = 0; w < workers; ++w) grads.emplace_back(params);
      std::vector<double> losses(batch.size(), 0.0);
      parallel_chunks(batch.size(), cfg.threads, [&](std::size_t w, std::size_t begin, std::size_t end) {
        Tape tape;
        for (std::size_t i = begin; i < end; ++i) {
          tape.seed(dropout_seed(cfg.seed, epoch, order[b + i]));
          auto l = sentence_loss(tape, model, *batch[i], counts, true);
          losses[i] = l.trigger + l.role + l.identification;
          if (l.total.valid()) {
            tape.backward(l.total, &grads[w]);
          } else {
            tape.clear();
          }
        }
      });
      for (std::size_t w = 1; w < workers; ++w) grads[0].accumulate(grads[w]);
      double batch_loss = std::accumulate(losses.begin(), losses.end(), 0.0) + l2_penalty(params, cfg.l2);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
      }
      add_l2_gradient(params, cfg.l2, grads[0]);
      adam.step(params, grads[0]);
      loss_sum += batch_loss;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / batches;
    rec.scores = score_all(predict_corpus(model, select_enc, cfg.threads), select_gold);
    rec.selection_loss = evaluation_loss(model, select_enc);
    if (!std::isfinite(rec.selection_loss)) {
      throw NumericError("non-finite evaluation loss in epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);

    nlohmann::ordered_json train_line;
    train_line["epoch"] = epoch;
    train_line["split"] = "train";
    if (!has_dev) train_line.update(score_fields(rec.scores));
    train_line["loss"] = rec.train_loss;
    emit(train_line);
    if (has_dev) {
      nlohmann::ordered_json dev_line;
      dev_line["epoch"] = epoch;
      dev_line["split"] = "dev";
      dev_line.update(score_fields(rec.scores));
      dev_line["loss"] = rec.selection_loss;
      emit(dev_line);
    }

    const std::tuple<double, double> key{rec.scores.role.f1(), rec.scores.trigger.f1()};
    if (key > best_key) {
      best_key = key;
      result.best_epoch = epoch;
      result.best_scores = rec.scores;
      best_values.clear();
      for (std::size_t i = 0; i < params.size(); ++i) best_values.push_back(params[i].value);
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  for (std::size_t i = 0; i < params.size() && !best_values.empty(); ++i) params[i].value = best_values[i];
  return result;
}

}  // namespace jeesdp
