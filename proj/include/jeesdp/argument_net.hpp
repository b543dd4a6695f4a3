// Argument stage: path-masked pair encoder with dynamic multi-pooling, the
// path-length graph convolution with level attention, and the output heads.
#ifndef JEESDP_ARGUMENT_NET_HPP_
#define JEESDP_ARGUMENT_NET_HPP_

#include <random>
#include <vector>

#include "jeesdp/corpus.hpp"
#include "jeesdp/embeddings.hpp"
#include "jeesdp/graph_sdp.hpp"

namespace jeesdp {

struct DmcnnParams {
  Param* weight = nullptr;  // (window * n_h) x n_k, window offsets stacked top to bottom
  Param* bias = nullptr;    // 1 x n_k
  int window = 3;
};

// Level d uses column d of gate_weight / gate_bias. The attention weights are
// shared across levels; z holds one scalar per level.
struct GcnSdpParams {
  Param* gate_weight = nullptr;       // n_o x (n_s + 1)
  Param* gate_bias = nullptr;         // 1 x (n_s + 1)
  Param* attention_weight = nullptr;  // n_o x 1
  Param* attention_bias = nullptr;    // 1 x 1
  Param* level_weight = nullptr;      // 1 x (n_s + 1), z
  int levels() const { return static_cast<int>(level_weight->value.cols()); }
};

struct OutputHeadParams {
  Param* w4 = nullptr;
  Param* b4 = nullptr;
  Param* w5 = nullptr;
  Param* b5 = nullptr;
};

DmcnnParams make_dmcnn(Params& params, int input_width, int filters, int window, std::mt19937_64& rng);
GcnSdpParams make_gcn_sdp(Params& params, int feature_width, int max_sdp_length, double init_scale,
                          std::mt19937_64& rng);
OutputHeadParams make_output_head(Params& params, const std::string& prefix, int input_width, int hidden,
                                  int classes, std::mt19937_64& rng);

// Row k = [P_k | y_k | PF(k, trigger) | PF(k, argument)]; rows at pad
// positions are zero.
Var build_pair_input(Tape& tape, const Var& encoded, const Var& trigger_scores, const EmbeddingTables& tables,
                     const Span& trigger, const Span& argument, int real_length, int max_length);

// Multiplies row k by mask[k].
Var apply_sdp_mask(Tape& tape, const Var& pair_input, const IntVector& mask);

// Three pooling segments split after the first token of each candidate,
// ordered by position: [0, p1], (p1, p2], (p2, end). An empty segment pools
// the value of one all-pad window, relu(bias).
std::vector<ad::Segment> pooling_segments(int trigger_pos, int argument_pos, int length);

// Same-padded convolution over the rows followed by ReLU and per-segment max
// per filter; 1 x 3 n_k laid out [segment 1 | segment 2 | segment 3].
// Windows that only cover pad rows all evaluate to relu(bias), so only the
// first real_length + window / 2 + 1 rows are convolved.
Var dmcnn_forward(Tape& tape, const DmcnnParams& p, const Var& masked_input, int trigger_pos, int argument_pos,
                  int real_length);

// [OD | SDP-L embedding | argument type embedding].
Var pair_feature(Tape& tape, const EmbeddingTables& tables, const Var& pooled, int sdp_length, int etype);

// sigmoid(O W_d + b_d): one gate per argument (n_e x 1).
Var gcn_gate(Tape& tape, const GcnSdpParams& p, const Var& features, int level);

// M_d (g ⊙ O) with the gate broadcast across feature columns.
Var gcn_layer(Tape& tape, const Matrixd& adjacency, const Var& gate, const Var& features);

struct AttentionResult {
  Var aggregated;  // n_e x n_o
  Var scores;      // n_e x (n_s + 1); each row sums to 1
};

// Score(j, d) = softmax_d(z_d tanh(W3 . I_d[j] + b3)); output row j is
// sum_d Score(j, d) I_d[j].
AttentionResult attention_aggregate(Tape& tape, const GcnSdpParams& p, const std::vector<Var>& levels);

// Level sums without attention (the -ATT variant).
Var sum_aggregate(const std::vector<Var>& levels);

// Gated convolution over every level followed by aggregation.
AttentionResult gcn_sdp_forward(Tape& tape, const GcnSdpParams& p, const SdpLAdjacencySet<Scalar>& adjacency,
                                const Var& features, bool attention);

// softmax(W5 relu(W4 [O | I] + b4) + b5) per argument row; `graph` may be
// an empty handle when the graph convolution is disabled. Dropout applies to
// the hidden layer when `train`.
Var role_output(Tape& tape, const OutputHeadParams& p, const Var& features, const Var& graph,
                double dropout = 0.0, bool train = false);

}  // namespace jeesdp

#endif  // JEESDP_ARGUMENT_NET_HPP_
