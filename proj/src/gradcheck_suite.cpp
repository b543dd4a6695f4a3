#include "jeesdp/gradcheck_suite.hpp"

#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "jeesdp/argument_net.hpp"
#include "jeesdp/grad_check.hpp"
#include "jeesdp/model.hpp"
#include "jeesdp/synthetic.hpp"
#include "jeesdp/training.hpp"
#include "jeesdp/trigger_net.hpp"

namespace jeesdp {

namespace {

using Build = std::function<Var(Tape&, const Var&)>;

Matrixd random(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double bound = 0.5) {
  return ad::uniform_matrix<Scalar>(r, c, bound, rng);
}

// Every value uniform, biases included, so no ReLU sits exactly at zero.
void scramble(Params& ps, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& p = ps[i];
    p.value = random(p.value.rows(), p.value.cols(), rng);
    for (auto r : p.frozen_rows) p.value.row(r).setZero();
  }
}

Var weighted_sum(const Var& out, const Matrixd& w) { return ad::sum(ad::mul(out, out.tape()->constant(w))); }

struct Checker {
  const GradcheckOptions& opts;

  double operator()(const Build& f, const Matrixd& x, Params* ps) const {
    ad::ParamCheckOptions o{opts.inject_fault};
    double worst = ad::grad_check<Scalar>(f, x, opts.eps, o);
    if (ps != nullptr && ps->size() > 0) {
      worst = std::max(worst, ad::grad_check_params<Scalar>([&](Tape& t) { return f(t, t.constant(x)); }, *ps,
                                                            opts.eps, o));
    }
    return worst;
  }
};

double check_bilstm(const Checker& check, std::mt19937_64& rng) {
  Params ps;
  const auto p = make_bilstm(ps, 5, 3, rng);
  scramble(ps, rng);
  double worst = 0.0;
  for (int real : {4, 6}) {
    const Matrixd x = random(6, 5, rng);
    const Matrixd w = random(6, 6, rng);
    worst = std::max(worst, check([&](Tape& t, const Var& v) { return weighted_sum(bilstm_forward(t, p, v, real), w); },
                                  x, &ps));
  }
  return worst;
}

double check_trigger_head(const Checker& check, std::mt19937_64& rng) {
  Params ps;
  const auto p = make_trigger_head(ps, 6, 7, 5, rng);
  scramble(ps, rng);
  const Matrixd x = random(4, 6, rng);
  const Matrixd w = random(4, 5, rng);
  return check([&](Tape& t, const Var& v) { return weighted_sum(trigger_output(t, p, v, 0.0, false), w); }, x, &ps);
}

double check_pair_input(const Checker& check, std::mt19937_64& rng) {
  const int L = 8;
  Params ps;
  EmbeddingTables tables;
  tables.pf_trigger = &ps.add("pf_trigger", random(2 * L - 1, 3, rng));
  tables.pf_argument = &ps.add("pf_argument", random(2 * L - 1, 3, rng));
  const Matrixd x = random(L, 9, rng);
  const Matrixd w = random(L, 4 + 5 + 6, rng);
  return check(
      [&](Tape& t, const Var& v) {
        auto h = build_pair_input(t, ad::slice_cols(v, 0, 4), ad::slice_cols(v, 4, 5), tables, {1, 2}, {4, 6}, 6, L);
        return weighted_sum(h, w);
      },
      x, &ps);
}

double check_sdp_mask(const Checker& check, std::mt19937_64& rng) {
  IntVector mask(8);
  mask << 1, 0, 1, 1, 0, 1, 0, 0;
  const Matrixd x = random(8, 6, rng);
  const Matrixd w = random(8, 6, rng);
  return check([&](Tape& t, const Var& v) { return weighted_sum(apply_sdp_mask(t, v, mask), w); }, x, nullptr);
}

double check_dmcnn(const Checker& check, std::mt19937_64& rng) {
  const int L = 8;
  const int real = 6;
  double worst = 0.0;
  for (int window : {3, 2}) {
    Params ps;
    const auto p = make_dmcnn(ps, 4, 3, window, rng);
    scramble(ps, rng);
    Matrixd x = random(L, 4, rng);
    x.row(2).setZero();  // off the path
    x.bottomRows(L - real).setZero();
    for (auto [a, b] : {std::pair{1, 4}, std::pair{4, 1}, std::pair{5, 5}, std::pair{0, 5}}) {
      const Matrixd w = random(1, 9, rng);
      worst = std::max(
          worst, check([&](Tape& t, const Var& v) { return weighted_sum(dmcnn_forward(t, p, v, a, b, real), w); }, x,
                       &ps));
    }
  }
  return worst;
}

double check_gate(const Checker& check, std::mt19937_64& rng) {
  Params ps;
  const auto p = make_gcn_sdp(ps, 5, 3, 0.5, rng);
  scramble(ps, rng);
  const Matrixd x = random(3, 5, rng);
  const Matrixd w = random(3, 4, rng);
  return check(
      [&](Tape& t, const Var& v) {
        Var total;
        for (int d = 0; d < p.levels(); ++d) {
          auto term = weighted_sum(gcn_gate(t, p, v, d), w.col(d));
          total = d == 0 ? term : ad::add(total, term);
        }
        return total;
      },
      x, &ps);
}

double check_gcn_layer(const Checker& check, std::mt19937_64& rng) {
  Matrixd adjacency(3, 3);
  adjacency << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  const Matrixd x = random(3, 6, rng);
  const Matrixd w = random(3, 5, rng);
  return check(
      [&](Tape& t, const Var& v) {
        return weighted_sum(gcn_layer(t, adjacency, ad::slice_cols(v, 5, 1), ad::slice_cols(v, 0, 5)), w);
      },
      x, nullptr);
}

double check_attention(const Checker& check, std::mt19937_64& rng) {
  Params ps;
  const auto p = make_gcn_sdp(ps, 5, 3, 0.5, rng);
  scramble(ps, rng);
  const int levels = p.levels();
  const Matrixd x = random(3 * levels, 5, rng, 1.0);
  const Matrixd w = random(3, 5, rng);
  const Matrixd ws = random(3, levels, rng);
  return check(
      [&](Tape& t, const Var& v) {
        std::vector<Var> ls;
        for (int d = 0; d < levels; ++d) ls.push_back(ad::slice_rows(v, 3 * d, 3));
        auto r = attention_aggregate(t, p, ls);
        return ad::add(weighted_sum(r.aggregated, w), weighted_sum(r.scores, ws));
      },
      x, &ps);
}

double check_role_head(const Checker& check, std::mt19937_64& rng) {
  Params ps;
  const auto p = make_output_head(ps, "role", 10, 6, 4, rng);
  scramble(ps, rng);
  const Matrixd x = random(3, 10, rng);
  const Matrixd w = random(3, 4, rng);
  double worst = check(
      [&](Tape& t, const Var& v) {
        return weighted_sum(role_output(t, p, ad::slice_cols(v, 0, 5), ad::slice_cols(v, 5, 5)), w);
      },
      x, &ps);
  Params ps_single;
  const auto q = make_output_head(ps_single, "role", 5, 6, 4, rng);
  scramble(ps_single, rng);
  const Matrixd y = random(3, 5, rng);
  worst = std::max(worst, check([&](Tape& t, const Var& v) { return weighted_sum(role_output(t, q, v, Var()), w); },
                                y, &ps_single));
  return worst;
}

// The whole network on one short multi-event sentence.
double check_joint_loss(const GradcheckOptions& opts, std::mt19937_64& rng) {
  const auto corpus = synthetic_corpus();
  const Sentence* pick = nullptr;
  for (const auto& s : corpus) {
    if (s.triggers.size() >= 2 && s.entities.size() >= 3 && s.size() <= 14) {
      pick = &s;
      break;
    }
  }
  if (pick == nullptr) throw std::runtime_error("gradcheck: no suitable fixture sentence");
  TrainConfig cfg;
  cfg.max_length = 16;
  cfg.use_contextual = false;
  cfg.word_dim = 3;
  cfg.pos_dim = 2;
  cfg.dep_dim = 2;
  cfg.entity_dim = 2;
  cfg.position_dim = 2;
  cfg.sdp_length_dim = 2;
  cfg.argument_type_dim = 2;
  cfg.lstm_hidden = 2;
  cfg.trigger_hidden = 3;
  cfg.filters = 2;
  cfg.max_sdp_length = 3;
  cfg.role_hidden = 3;
  cfg.identification_hidden = 3;
  cfg.identification_head = true;
  cfg.dropout = 0.0;
  cfg.l2 = 1e-3;
  Model model(cfg, build_vocab(corpus), vocabulary_from_corpus({*pick}, cfg.word_dim));
  scramble(model.params(), rng);
  const auto enc = model.encode(*pick, nullptr);
  const auto counts = count_targets({&enc});
  ad::ParamCheckOptions o{opts.inject_fault};
  return ad::grad_check_params<Scalar>(
      [&](Tape& t) {
        auto data = sentence_loss(t, model, enc, counts, false).total;
        return ad::add(data, l2_term(t, model.params(), cfg.l2));
      },
      model.params(), opts.eps, o);
}

}  // namespace

std::vector<GradcheckRow> run_gradcheck_suite(const GradcheckOptions& options) {
  const auto& m = options.module;
  if (m != "all" && m != "trigger" && m != "argument" && m != "loss") {
    throw std::invalid_argument("unknown gradcheck module '" + m + "'");
  }
  const Checker check{options};
  std::vector<GradcheckRow> rows;
  auto run = [&](const char* name, const char* group, const std::function<double(std::mt19937_64&)>& f) {
    if (m != "all" && m != group) return;
    std::mt19937_64 rng(0x9c0ffeeULL + rows.size());
    const double err = f(rng);
    rows.push_back({name, group, err, err < options.tolerance});
  };
  run("bilstm", "trigger", [&](auto& rng) { return check_bilstm(check, rng); });
  run("trigger_head", "trigger", [&](auto& rng) { return check_trigger_head(check, rng); });
  run("pair_input", "argument", [&](auto& rng) { return check_pair_input(check, rng); });
  run("sdp_mask", "argument", [&](auto& rng) { return check_sdp_mask(check, rng); });
  run("dmcnn", "argument", [&](auto& rng) { return check_dmcnn(check, rng); });
  run("gate", "argument", [&](auto& rng) { return check_gate(check, rng); });
  run("gcn_layer", "argument", [&](auto& rng) { return check_gcn_layer(check, rng); });
  run("attention", "argument", [&](auto& rng) { return check_attention(check, rng); });
  run("role_head", "argument", [&](auto& rng) { return check_role_head(check, rng); });
  run("joint_loss", "loss", [&](auto& rng) { return check_joint_loss(options, rng); });
  return rows;
}

std::string gradcheck_table(const std::vector<GradcheckRow>& rows) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-14s %-9s %14s  %s\n", "component", "group", "max_rel_error", "status");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-14s %-9s %14.3e  %s\n", r.component.c_str(), r.group.c_str(), r.max_error,
                  r.passed ? "ok" : "FAIL");
    os << buf;
  }
  return os.str();
}

}  // namespace jeesdp
