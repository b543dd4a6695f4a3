#include "jeesdp/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "jeesdp/checkpoint.hpp"
#include "jeesdp/config.hpp"
#include "jeesdp/corpus.hpp"
#include "jeesdp/evaluation.hpp"
#include "jeesdp/gradcheck_suite.hpp"
#include "jeesdp/graph_sdp.hpp"
#include "jeesdp/io.hpp"
#include "jeesdp/training.hpp"

namespace jeesdp {

namespace {

// Relative paths in a run config are taken from the config's directory.
void resolve_paths(RunConfig& rc, const std::string& config_path) {
  const auto base = std::filesystem::path(config_path).parent_path();
  for (std::string* p : {&rc.corpus, &rc.dev, &rc.test, &rc.word_vectors, &rc.contextual_vectors,
                         &rc.checkpoint_out, &rc.metrics_out}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
}

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(std::string("invalid seed '") + text + "' in " + what);
  }
  return v;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

std::string subset_table(const std::vector<EventPrediction>& pred, const std::vector<EventPrediction>& gold,
                         const std::vector<std::size_t>& idx, const std::string& title) {
  std::vector<EventPrediction> p;
  std::vector<EventPrediction> g;
  for (auto i : idx) {
    p.push_back(pred[i]);
    g.push_back(gold[i]);
  }
  return report_table(score_all(p, g), title + " (" + std::to_string(idx.size()) + " sentences)");
}

std::optional<ContextualVectors> maybe_contextual(const TrainConfig& cfg, const std::string& path) {
  if (!cfg.use_contextual) return std::nullopt;
  if (path.empty()) throw ConfigError("the model reads contextual vectors; pass --contextual");
  return load_contextual(path, cfg.contextual_dim);
}

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  std::optional<ContextualVectors> contextual;
  try {
    rc = load_run_config(a.config);
    resolve_paths(rc, a.config);
    if (const char* env = std::getenv("JEESDP_SEED"); env != nullptr && *env != '\0') {
      rc.train.seed = parse_seed(env, "JEESDP_SEED");
    }
    if (a.seed) rc.train.seed = *a.seed;
    if (rc.corpus.empty()) throw ConfigError("config key 'corpus' is required");
    if (rc.train.use_contextual && rc.contextual_vectors.empty()) {
      throw ConfigError("use_contextual is on but 'contextual_vectors' is not set");
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  Corpus train_set;
  Corpus dev_set;
  LabelVocab vocab;
  WordVectors words;
  try {
    train_set = load_corpus(rc.corpus).sentences;
    if (!rc.dev.empty()) dev_set = load_corpus(rc.dev).sentences;
    Corpus all = train_set;
    all.insert(all.end(), dev_set.begin(), dev_set.end());
    vocab = build_vocab(all);
    words = rc.word_vectors.empty() ? vocabulary_from_corpus(train_set, rc.train.word_dim)
                                    : load_word_vectors(rc.word_vectors, rc.train.word_dim);
    if (rc.train.use_contextual) contextual = load_contextual(rc.contextual_vectors, rc.train.contextual_dim);
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }

  std::string metrics;
  TrainOptions opts;
  opts.contextual = contextual ? &*contextual : nullptr;
  opts.on_metrics = [&](const std::string& line) {
    metrics += line;
    metrics += '\n';
    write_file_atomic(rc.metrics_out, metrics);
  };
  try {
    auto result = train(train_set, dev_set, rc.train, std::move(vocab), std::move(words), opts);
    save_checkpoint(*result.model, rc.checkpoint_out);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "best epoch %d: trigger F1 %.4f, argument identification F1 %.4f, role F1 %.4f\n",
                  result.best_epoch, result.best_scores.trigger.f1(), result.best_scores.identification.f1(),
                  result.best_scores.role.f1());
    out << buf;
    if (!rc.test.empty()) {
      const auto test = load_corpus(rc.test, &result.model->vocab()).sentences;
      const auto preds = predict_corpus(*result.model, test, opts.contextual, rc.train.threads);
      out << report_table(score_all(preds, gold_events(test)), "test");
    }
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string predictions;
  bool gold_as_predictions = false;
  std::string corpus;
  std::string contextual;
  bool split = false;
  bool distance_bins = false;
  std::string distance_csv;
  bool json = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const int sources = (a.checkpoint.empty() ? 0 : 1) + (a.predictions.empty() ? 0 : 1) + (a.gold_as_predictions ? 1 : 0);
  if (sources != 1) {
    err << "config error: give exactly one of --checkpoint, --predictions, --gold-as-predictions\n";
    return kExitConfig;
  }
  std::unique_ptr<Model> model;
  if (!a.checkpoint.empty()) {
    try {
      model = load_checkpoint(a.checkpoint);
    } catch (const std::exception& e) {
      err << "checkpoint error: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  Corpus corpus;
  std::vector<EventPrediction> preds;
  try {
    corpus = load_corpus(a.corpus, model ? &model->vocab() : nullptr).sentences;
    if (!a.predictions.empty()) {
      std::ifstream in(a.predictions);
      if (!in) throw IoError("cannot open '" + a.predictions + "'");
      preds = read_predictions(in);
    } else if (a.gold_as_predictions) {
      preds = gold_events(corpus);
    }
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  if (model) {
    try {
      const auto ctx = maybe_contextual(model->config(), a.contextual);
      preds = predict_corpus(*model, corpus, ctx ? &*ctx : nullptr, model->config().threads);
    } catch (const std::exception& e) {
      err << "width mismatch: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  try {
    const auto gold = gold_events(corpus);
    const auto scores = score_all(preds, gold);
    out << (a.json ? report_json(scores) + "\n" : report_table(scores, "all (" + std::to_string(corpus.size()) + " sentences)"));
    if (a.split) {
      const auto s = split_one_vs_many(gold);
      out << '\n' << subset_table(preds, gold, s.one_event, "1/1");
      out << '\n' << subset_table(preds, gold, s.multi_event, "1/N");
      out << "\nexcluded (no gold trigger): " << s.excluded.size() << " sentences\n";
    }
    if (a.distance_bins || !a.distance_csv.empty()) {
      const auto csv = distance_csv(distance_bin_report(preds, gold));
      if (a.distance_bins) out << "\ndistance bins (role classification)\n" << csv;
      if (!a.distance_csv.empty()) write_file_atomic(a.distance_csv, csv);
    }
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string corpus;
  std::string contextual;
  std::string output = "-";
};

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  std::unique_ptr<Model> model;
  try {
    model = load_checkpoint(a.checkpoint);
  } catch (const std::exception& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitConfig;
  }
  Corpus corpus;
  try {
    corpus = load_corpus(a.corpus, &model->vocab()).sentences;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  std::vector<EventPrediction> preds;
  try {
    const auto ctx = maybe_contextual(model->config(), a.contextual);
    preds = predict_corpus(*model, corpus, ctx ? &*ctx : nullptr, model->config().threads);
  } catch (const std::exception& e) {
    err << "width mismatch: " << e.what() << '\n';
    return kExitConfig;
  }
  std::ostringstream os;
  write_predictions(os, preds);
  try {
    emit(a.output, os.str(), out);
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

struct InspectArgs {
  std::string corpus;
  std::string pairs = "trigger-argument";
  std::string z_weights;
  std::string output = "-";
};

std::string span_text(const Sentence& s, const Span& sp) {
  std::string t;
  for (int k = sp.start; k < sp.end; ++k) {
    if (!t.empty()) t += ' ';
    t += s.tokens[static_cast<std::size_t>(k)].text;
  }
  return t;
}

int cmd_inspect_sdp(const InspectArgs& a, std::ostream& out, std::ostream& err) {
  std::string pairs = a.pairs;
  if (pairs == "trigger×argument" || pairs == "trigger-x-argument") pairs = "trigger-argument";
  if (pairs == "argument×argument" || pairs == "argument-x-argument") pairs = "argument-argument";
  if (pairs != "trigger-argument" && pairs != "argument-argument") {
    err << "config error: --pairs must be trigger-argument or argument-argument\n";
    return kExitConfig;
  }
  std::ostringstream os;
  if (!a.corpus.empty()) {
    Corpus corpus;
    try {
      corpus = load_corpus(a.corpus).sentences;
    } catch (const std::exception& e) {
      err << "data error: " << e.what() << '\n';
      return kExitData;
    }
    for (const auto& s : corpus) {
      const auto paths = bfs_all_pairs(dependency_graph(s));
      std::vector<Span> espans;
      for (const auto& e : s.entities) espans.push_back(e.span);
      const auto emask = candidate_mask(espans, s.size());
      if (pairs == "trigger-argument") {
        std::vector<Span> tspans;
        for (const auto& t : s.triggers) tspans.push_back(t.span);
        const auto r = compute_sdp(paths, candidate_mask(tspans, s.size()), emask);
        for (int t = 0; t < r.num_triggers(); ++t) {
          for (int j = 0; j < r.num_arguments(); ++j) {
            std::vector<int> on_path;
            const auto m = r.mask(t, j);
            for (int k = 0; k < m.size(); ++k) {
              if (m(k) != 0) on_path.push_back(k);
            }
            nlohmann::ordered_json line;
            line["id"] = s.id;
            line["trigger_idx"] = t;
            line["trigger"] = span_text(s, tspans[static_cast<std::size_t>(t)]);
            line["entity_id"] = s.entities[static_cast<std::size_t>(j)].id;
            line["argument"] = span_text(s, espans[static_cast<std::size_t>(j)]);
            line["sdp_len"] = r.sdp_len(t, j);
            line["sdp"] = on_path;
            os << line.dump() << '\n';
          }
        }
      } else {
        const auto m = compute_argument_sdp_l(paths, emask);
        for (int i = 0; i < m.rows(); ++i) {
          for (int j = i + 1; j < m.cols(); ++j) {
            nlohmann::ordered_json line;
            line["id"] = s.id;
            line["first"] = s.entities[static_cast<std::size_t>(i)].id;
            line["first_text"] = span_text(s, espans[static_cast<std::size_t>(i)]);
            line["second"] = s.entities[static_cast<std::size_t>(j)].id;
            line["second_text"] = span_text(s, espans[static_cast<std::size_t>(j)]);
            line["sdp_len"] = m(i, j);
            os << line.dump() << '\n';
          }
        }
      }
    }
  }
  if (!a.z_weights.empty()) {
    std::unique_ptr<Model> model;
    try {
      model = load_checkpoint(a.z_weights);
    } catch (const std::exception& e) {
      err << "checkpoint error: " << e.what() << '\n';
      return kExitConfig;
    }
    const auto* z = model->params().find("gcn_level_weight");
    if (z == nullptr) {
      err << "config error: the checkpoint was trained without the graph convolution\n";
      return kExitConfig;
    }
    // Probe: every level activation tanh(W3 I_d + b3) equal to 1, so the
    // profile is softmax(z).
    const Eigen::RowVectorXd zv = z->value.row(0);
    Eigen::RowVectorXd e = (zv.array() - zv.maxCoeff()).exp();
    e /= e.sum();
    nlohmann::ordered_json line;
    line["z"] = std::vector<double>(zv.data(), zv.data() + zv.size());
    line["score_profile"] = std::vector<double>(e.data(), e.data() + e.size());
    line["levels"] = zv.size();
    os << line.dump() << '\n';
  }
  if (a.corpus.empty() && a.z_weights.empty()) {
    err << "config error: give --corpus and/or --z-weights\n";
    return kExitConfig;
  }
  try {
    emit(a.output, os.str(), out);
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

int cmd_gradcheck(const std::string& module, bool inject, std::ostream& out, std::ostream& err) {
  GradcheckOptions opts;
  opts.module = module;
  opts.inject_fault = inject;
  std::vector<GradcheckRow> rows;
  try {
    rows = run_gradcheck_suite(opts);
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "gradcheck failed: " << e.what() << '\n';
    return kExitGradcheck;
  }
  out << gradcheck_table(rows);
  std::string failed;
  for (const auto& r : rows) {
    if (!r.passed) failed += (failed.empty() ? "" : ", ") + r.component;
  }
  if (!failed.empty()) {
    err << "gradcheck failed: " << failed << '\n';
    return kExitGradcheck;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint event extraction with shortest dependency paths"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model from a run config");
  train->add_option("--config", train_args.config, "Run config file (key = value)")->required();
  train->add_option("--seed", train_args.seed, "Override the config seed (default: config, then JEESDP_SEED)");
  train->footer("Config keys and defaults:\n" + describe_config_keys());

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score predictions against a gold corpus");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Predict with this checkpoint");
  eval->add_option("--predictions", eval_args.predictions, "Score a predictions JSONL file");
  eval->add_flag("--gold-as-predictions", eval_args.gold_as_predictions, "Score the gold annotation against itself");
  eval->add_option("--corpus", eval_args.corpus, "Gold corpus (JSONL)")->required();
  eval->add_option("--contextual", eval_args.contextual, "Contextual vectors (JSONL), when the model uses them");
  eval->add_flag("--split-1n", eval_args.split, "Also report single-event and multi-event sentences separately");
  eval->add_flag("--distance-bins", eval_args.distance_bins, "Also print role scores by trigger-argument distance");
  eval->add_option("--distance-csv", eval_args.distance_csv, "Write the distance report as CSV");
  eval->add_flag("--json", eval_args.json, "Print the main report as JSON");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Decode events for a corpus");
  predict->add_option("--checkpoint", predict_args.checkpoint, "Model checkpoint")->required();
  predict->add_option("--corpus", predict_args.corpus, "Input corpus (JSONL)")->required();
  predict->add_option("--contextual", predict_args.contextual, "Contextual vectors (JSONL), when the model uses them");
  predict->add_option("--output", predict_args.output, "Output JSONL, - for stdout")->capture_default_str();

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect-sdp", "Print shortest dependency paths and learned level weights");
  inspect->add_option("--corpus", inspect_args.corpus, "Corpus (JSONL)");
  inspect->add_option("--pairs", inspect_args.pairs, "trigger-argument or argument-argument")->capture_default_str();
  inspect->add_option("--z-weights", inspect_args.z_weights, "Checkpoint whose level weights to print");
  inspect->add_option("--output", inspect_args.output, "Output JSONL, - for stdout")->capture_default_str();

  std::string module = "all";
  bool inject = false;
  auto* grad = app.add_subcommand("gradcheck", "Check analytic gradients against central differences");
  grad->add_option("--module", module, "all, trigger, argument, or loss")->capture_default_str();
  grad->add_flag("--inject-fault", inject, "Flip analytic gradients (self-test)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (*train) return cmd_train(train_args, out, err);
  if (*eval) return cmd_eval(eval_args, out, err);
  if (*predict) return cmd_predict(predict_args, out, err);
  if (*inspect) return cmd_inspect_sdp(inspect_args, out, err);
  return cmd_gradcheck(module, inject, out, err);
}

}  // namespace jeesdp
