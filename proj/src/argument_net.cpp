#include "jeesdp/argument_net.hpp"

#include <algorithm>

#include "jeesdp/trigger_net.hpp"

namespace jeesdp {

DmcnnParams make_dmcnn(Params& params, int input_width, int filters, int window, std::mt19937_64& rng) {
  DmcnnParams p;
  p.window = window;
  p.weight = &params.add("dmcnn_weight", glorot(static_cast<Eigen::Index>(window) * input_width, filters, rng));
  p.bias = &params.add("dmcnn_bias", Matrixd::Zero(1, filters), true);
  return p;
}

GcnSdpParams make_gcn_sdp(Params& params, int feature_width, int max_sdp_length, double init_scale,
                          std::mt19937_64& rng) {
  const int levels = max_sdp_length + 1;
  GcnSdpParams p;
  p.gate_weight = &params.add("gcn_gate_weight", ad::uniform_matrix<Scalar>(feature_width, levels, init_scale, rng));
  p.gate_bias = &params.add("gcn_gate_bias", Matrixd::Zero(1, levels), true);
  p.attention_weight =
      &params.add("gcn_attention_weight", ad::uniform_matrix<Scalar>(feature_width, 1, init_scale, rng));
  p.attention_bias = &params.add("gcn_attention_bias", Matrixd::Zero(1, 1), true);
  p.level_weight = &params.add("gcn_level_weight", Matrixd::Ones(1, levels));
  return p;
}

OutputHeadParams make_output_head(Params& params, const std::string& prefix, int input_width, int hidden,
                                  int classes, std::mt19937_64& rng) {
  OutputHeadParams p;
  p.w4 = &params.add(prefix + "_w4", glorot(input_width, hidden, rng));
  p.b4 = &params.add(prefix + "_b4", Matrixd::Zero(1, hidden), true);
  p.w5 = &params.add(prefix + "_w5", glorot(hidden, classes, rng));
  p.b5 = &params.add(prefix + "_b5", Matrixd::Zero(1, classes), true);
  return p;
}

Var build_pair_input(Tape& tape, const Var& encoded, const Var& trigger_scores, const EmbeddingTables& tables,
                     const Span& trigger, const Span& argument, int real_length, int max_length) {
  if (encoded.rows() != max_length || trigger_scores.rows() != max_length) {
    ad::detail::shape_error("build_pair_input", encoded.shape(), trigger_scores.shape());
  }
  Matrixd pad_mask = Matrixd::Zero(max_length, 1);
  pad_mask.topRows(real_length).setOnes();
  auto mask = tape.constant(std::move(pad_mask));
  auto scores = real_length == max_length ? trigger_scores : ad::mul(trigger_scores, mask);
  auto encoded_rows = real_length == max_length ? encoded : ad::mul(encoded, mask);
  return ad::concat_cols<Scalar>({encoded_rows, scores,
                                  position_features(tape, *tables.pf_trigger, trigger, real_length, max_length),
                                  position_features(tape, *tables.pf_argument, argument, real_length, max_length)});
}

Var apply_sdp_mask(Tape& tape, const Var& pair_input, const IntVector& mask) {
  if (mask.size() != pair_input.rows()) {
    ad::detail::shape_error("apply_sdp_mask", pair_input.shape(), ad::Shape{mask.size(), 1});
  }
  Matrixd m = mask.transpose().cast<Scalar>();
  return ad::mul(pair_input, tape.constant(std::move(m)));
}

std::vector<ad::Segment> pooling_segments(int trigger_pos, int argument_pos, int length) {
  const int p1 = std::min(trigger_pos, argument_pos);
  const int p2 = std::max(trigger_pos, argument_pos);
  return {{0, p1 + 1}, {p1 + 1, p2 + 1}, {p2 + 1, length}};
}

Var dmcnn_forward(Tape& tape, const DmcnnParams& p, const Var& masked_input, int trigger_pos, int argument_pos,
                  int real_length) {
  const int length = static_cast<int>(masked_input.rows());
  const auto width = masked_input.cols();
  const int window = p.window;
  if (p.weight->value.rows() != window * width) {
    ad::detail::shape_error("dmcnn_forward", masked_input.shape(), p.weight->shape());
  }
  if (trigger_pos < 0 || trigger_pos >= length || argument_pos < 0 || argument_pos >= length) {
    ad::detail::shape_error("dmcnn_forward", masked_input.shape(), "candidate position out of range");
  }
  const int left = window / 2;
  const int right = window - 1 - left;
  const int rows = std::min(length, real_length + left + 1);

  auto input = rows == length ? masked_input : ad::slice_rows(masked_input, 0, rows);
  std::vector<Var> stacked;
  if (left > 0) stacked.push_back(tape.constant(Matrixd::Zero(left, width)));
  stacked.push_back(input);
  if (right > 0) stacked.push_back(tape.constant(Matrixd::Zero(right, width)));
  auto padded = stacked.size() == 1 ? input : ad::concat_rows(stacked);

  std::vector<Var> windows;
  for (int o = 0; o < window; ++o) windows.push_back(ad::slice_rows(padded, o, rows));
  auto unfolded = window == 1 ? windows.front() : ad::concat_cols(windows);
  auto bias = tape.param(*p.bias);
  auto conv = ad::relu(ad::add(ad::matmul(unfolded, tape.param(*p.weight)), bias));
  auto with_pad_window = ad::concat_rows<Scalar>({conv, ad::relu(bias)});

  auto segments = pooling_segments(trigger_pos, argument_pos, length);
  for (auto& s : segments) {
    if (s.begin >= s.end || s.begin >= rows) {
      s = {rows, rows + 1};
    } else {
      s.end = std::min<Eigen::Index>(s.end, rows);
    }
  }
  auto pooled = ad::max_over_segments(with_pad_window, segments);
  return ad::concat_cols<Scalar>({ad::slice_rows(pooled, 0, 1), ad::slice_rows(pooled, 1, 1), ad::slice_rows(pooled, 2, 1)});
}

Var pair_feature(Tape& tape, const EmbeddingTables& tables, const Var& pooled, int sdp_length, int etype) {
  return ad::concat_cols<Scalar>({pooled, sdp_l_embedding(tape, *tables.sdp_length, sdp_length),
                                  argument_type_embedding(tape, *tables.argument_type, etype)});
}

Var gcn_gate(Tape& tape, const GcnSdpParams& p, const Var& features, int level) {
  auto w = ad::slice_cols(tape.param(*p.gate_weight), level, 1);
  auto b = ad::slice_cols(tape.param(*p.gate_bias), level, 1);
  return ad::sigmoid(ad::add(ad::matmul(features, w), b));
}

Var gcn_layer(Tape& tape, const Matrixd& adjacency, const Var& gate, const Var& features) {
  if (adjacency.rows() != features.rows() || adjacency.cols() != features.rows()) {
    ad::detail::shape_error("gcn_layer", ad::Shape{adjacency.rows(), adjacency.cols()}, features.shape());
  }
  if (gate.rows() != features.rows() || gate.cols() != 1) {
    ad::detail::shape_error("gcn_layer", gate.shape(), features.shape());
  }
  return ad::matmul(tape.constant(adjacency), ad::mul(features, gate));
}

AttentionResult attention_aggregate(Tape& tape, const GcnSdpParams& p, const std::vector<Var>& levels) {
  if (static_cast<int>(levels.size()) != p.levels()) {
    throw ad::ShapeError("attention_aggregate: expected " + std::to_string(p.levels()) + " levels, got " +
                         std::to_string(levels.size()));
  }
  auto w3 = tape.param(*p.attention_weight);
  auto b3 = tape.param(*p.attention_bias);
  std::vector<Var> level_scores;
  level_scores.reserve(levels.size());
  for (const auto& level : levels) level_scores.push_back(ad::tanh(ad::add(ad::matmul(level, w3), b3)));
  auto scores = ad::softmax_rows(ad::mul(ad::concat_cols(level_scores), tape.param(*p.level_weight)));
  Var aggregated;
  for (std::size_t d = 0; d < levels.size(); ++d) {
    auto term = ad::mul(levels[d], ad::slice_cols(scores, static_cast<Eigen::Index>(d), 1));
    aggregated = d == 0 ? term : ad::add(aggregated, term);
  }
  return {aggregated, scores};
}

Var sum_aggregate(const std::vector<Var>& levels) {
  Var total = levels.front();
  for (std::size_t d = 1; d < levels.size(); ++d) total = ad::add(total, levels[d]);
  return total;
}

AttentionResult gcn_sdp_forward(Tape& tape, const GcnSdpParams& p, const SdpLAdjacencySet<Scalar>& adjacency,
                                const Var& features, bool attention) {
  if (adjacency.max_length() + 1 != p.levels()) {
    throw ad::ShapeError("gcn_sdp_forward: adjacency levels do not match the parameters");
  }
  std::vector<Var> levels;
  for (int d = 0; d < p.levels(); ++d) {
    levels.push_back(gcn_layer(tape, adjacency.levels[static_cast<std::size_t>(d)], gcn_gate(tape, p, features, d),
                               features));
  }
  if (attention) return attention_aggregate(tape, p, levels);
  return {sum_aggregate(levels), Var()};
}

Var role_output(Tape& tape, const OutputHeadParams& p, const Var& features, const Var& graph, double dropout,
                bool train) {
  auto input = graph.valid() ? ad::concat_cols<Scalar>({features, graph}) : features;
  auto hidden = ad::relu(ad::add(ad::matmul(input, tape.param(*p.w4)), tape.param(*p.b4)));
  hidden = ad::dropout(hidden, dropout, train);
  return ad::softmax_rows(ad::add(ad::matmul(hidden, tape.param(*p.w5)), tape.param(*p.b5)));
}

}  // namespace jeesdp
