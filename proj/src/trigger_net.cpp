#include "jeesdp/trigger_net.hpp"

#include <cmath>

namespace jeesdp {

Matrixd glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return ad::uniform_matrix<Scalar>(rows, cols, bound, rng);
}

namespace {

LstmCellParams make_cell(Params& params, const std::string& prefix, int input_width, int hidden,
                         std::mt19937_64& rng) {
  LstmCellParams c;
  c.input_weight = &params.add(prefix + "_input_weight", glorot(input_width, 4 * hidden, rng));
  c.hidden_weight = &params.add(prefix + "_hidden_weight", glorot(hidden, 4 * hidden, rng));
  c.bias = &params.add(prefix + "_bias", Matrixd::Zero(1, 4 * hidden), true);
  return c;
}

// Outputs of one direction, in time order, for rows [0, n).
std::vector<Var> run_direction(Tape& tape, const LstmCellParams& p, const Var& projected, int n, bool reverse) {
  const int h = p.hidden();
  auto wh = tape.param(*p.hidden_weight);
  Var state = tape.constant(Matrixd::Zero(1, h));
  Var cell = tape.constant(Matrixd::Zero(1, h));
  std::vector<Var> out(static_cast<std::size_t>(n));
  for (int step = 0; step < n; ++step) {
    const int t = reverse ? n - 1 - step : step;
    auto gates = ad::add(ad::slice_rows(projected, t, 1), ad::matmul(state, wh));
    auto in = ad::sigmoid(ad::slice_cols(gates, 0, h));
    auto forget = ad::sigmoid(ad::slice_cols(gates, h, h));
    auto output = ad::sigmoid(ad::slice_cols(gates, 2 * h, h));
    auto candidate = ad::tanh(ad::slice_cols(gates, 3 * h, h));
    cell = ad::add(ad::mul(forget, cell), ad::mul(in, candidate));
    state = ad::mul(output, ad::tanh(cell));
    out[static_cast<std::size_t>(t)] = state;
  }
  return out;
}

}  // namespace

BiLstmParams make_bilstm(Params& params, int input_width, int hidden, std::mt19937_64& rng) {
  return {make_cell(params, "lstm_forward", input_width, hidden, rng),
          make_cell(params, "lstm_backward", input_width, hidden, rng)};
}

TriggerHeadParams make_trigger_head(Params& params, int input_width, int hidden, int labels, std::mt19937_64& rng) {
  TriggerHeadParams p;
  p.w1 = &params.add("trigger_w1", glorot(input_width, hidden, rng));
  p.b1 = &params.add("trigger_b1", Matrixd::Zero(1, hidden), true);
  p.w2 = &params.add("trigger_w2", glorot(hidden, labels, rng));
  p.b2 = &params.add("trigger_b2", Matrixd::Zero(1, labels), true);
  return p;
}

Var bilstm_forward(Tape& tape, const BiLstmParams& p, const Var& x, int real_length) {
  const auto width = p.forward.input_weight->value.rows();
  if (x.cols() != width) {
    ad::detail::shape_error("bilstm_forward", x.shape(), ad::Shape{x.rows(), width});
  }
  const int rows = static_cast<int>(x.rows());
  const int h = p.forward.hidden();
  if (real_length == 0) return tape.constant(Matrixd::Zero(rows, 2 * h));
  auto real = real_length == rows ? x : ad::slice_rows(x, 0, real_length);
  auto project = [&](const LstmCellParams& c) {
    return ad::add(ad::matmul(real, tape.param(*c.input_weight)), tape.param(*c.bias));
  };
  auto fwd = run_direction(tape, p.forward, project(p.forward), real_length, false);
  auto bwd = run_direction(tape, p.backward, project(p.backward), real_length, true);
  auto encoded = ad::concat_cols<Scalar>({ad::concat_rows(fwd), ad::concat_rows(bwd)});
  if (real_length == rows) return encoded;
  return ad::concat_rows<Scalar>({encoded, tape.constant(Matrixd::Zero(rows - real_length, 2 * h))});
}

Var trigger_output(Tape& tape, const TriggerHeadParams& p, const Var& encoded, double dropout, bool train) {
  auto hidden = ad::relu(ad::add(ad::matmul(encoded, tape.param(*p.w1)), tape.param(*p.b1)));
  hidden = ad::dropout(hidden, dropout, train);
  return ad::softmax_rows(ad::add(ad::matmul(hidden, tape.param(*p.w2)), tape.param(*p.b2)));
}

std::vector<int> argmax_labels(const Matrixd& probs, int real_length) {
  std::vector<int> labels(static_cast<std::size_t>(probs.rows()), 0);
  for (int r = 0; r < real_length && r < probs.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = c;
    }
    labels[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return labels;
}

TriggerCandidates extract_trigger_candidates(const Matrixd& probs, const Sentence& s, const LabelVocab& vocab,
                                             CandidateMode mode) {
  TriggerCandidates out;
  if (mode == CandidateMode::kGold) {
    out.triggers = s.triggers;
  } else {
    const auto labels = argmax_labels(probs, s.real_length());
    out.triggers = decode_bio(labels, vocab);
  }
  for (const auto& t : out.triggers) {
    const auto idx = vocab.subtype_index(t.subtype);
    if (!idx) throw CorpusError("unknown trigger subtype '" + t.subtype + "'");
    out.subtypes.push_back(*idx);
  }
  return out;
}

}  // namespace jeesdp
