// Shortest dependency paths between candidate spans.
//
// Arcs are undirected. The "no path" value is the number of tokens n_w, which
// is also what a pair sharing a token keeps.
#ifndef JEESDP_GRAPH_SDP_HPP_
#define JEESDP_GRAPH_SDP_HPP_

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "jeesdp/corpus.hpp"

namespace jeesdp {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntVector = Eigen::Matrix<int, 1, Eigen::Dynamic>;

inline constexpr int kMaxSdpLength = 10;

struct DepGraph {
  IntMatrix adjacency;  // symmetric 0/1, zero diagonal

  int size() const { return static_cast<int>(adjacency.rows()); }
};

DepGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges);
// Head arcs of a (normalized) sentence; self-headed tokens and ROOT add none.
DepGraph dependency_graph(const Sentence& s);

// One row per candidate with ones over its span.
IntMatrix candidate_mask(const std::vector<Span>& spans, int n_w);

struct AllPairsPaths {
  IntMatrix lengths;  // hop counts; n_w when disconnected
  IntMatrix parent;   // parent(i, j): predecessor of j on the BFS tree from i, -1 if none

  int size() const { return static_cast<int>(lengths.rows()); }
  // 0/1 membership of every token on the stored i -> j path (endpoints
  // included); all zeros when disconnected.
  IntVector path_mask(int i, int j) const;
  // Tokens from i to j in walk order; empty when disconnected.
  std::vector<int> path_tokens(int i, int j) const;
};

// BFS from every token, neighbours visited in ascending index order.
AllPairsPaths bfs_all_pairs(const DepGraph& g);

struct SdpResult {
  std::vector<IntMatrix> sdp;  // one n_e x n_w block per trigger
  IntMatrix sdp_len;           // n_t x n_e

  int num_triggers() const { return static_cast<int>(sdp_len.rows()); }
  int num_arguments() const { return static_cast<int>(sdp_len.cols()); }
  IntVector mask(int trigger, int argument) const { return sdp[static_cast<std::size_t>(trigger)].row(argument); }
};

// Minimum over token pairs of the two spans, first strict improvement wins.
// Pairs that share a token keep length n_w. Every pair's mask additionally
// covers both spans; values are clipped to 0/1.
SdpResult compute_sdp(const DepGraph& g, const IntMatrix& triggers, const IntMatrix& arguments);
SdpResult compute_sdp(const AllPairsPaths& paths, const IntMatrix& triggers, const IntMatrix& arguments);

// Symmetric n_e x n_e lengths between argument candidates, zero diagonal.
IntMatrix compute_argument_sdp_l(const DepGraph& g, const IntMatrix& arguments);
IntMatrix compute_argument_sdp_l(const AllPairsPaths& paths, const IntMatrix& arguments);

// levels[0] is the identity; levels[d](i, j) = 1 iff m(i, j) == d for
// 1 <= d <= max_length. Longer paths appear in no level.
template <typename Scalar = double>
struct SdpLAdjacencySet {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> levels;

  int max_length() const { return static_cast<int>(levels.size()) - 1; }
};

template <typename Scalar = double>
SdpLAdjacencySet<Scalar> decompose_sdp_l(const IntMatrix& m, int max_length = kMaxSdpLength) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto n = m.rows();
  SdpLAdjacencySet<Scalar> out;
  out.levels.reserve(static_cast<std::size_t>(max_length) + 1);
  out.levels.push_back(Mat::Identity(n, n));
  for (int d = 1; d <= max_length; ++d) {
    out.levels.push_back((m.array() == d).template cast<Scalar>().matrix());
    out.levels.back().diagonal().setZero();
  }
  return out;
}

}  // namespace jeesdp

#endif  // JEESDP_GRAPH_SDP_HPP_
