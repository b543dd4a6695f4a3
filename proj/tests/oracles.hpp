// Reference implementations written as plain loops, used to check the
// library's vectorised code.
#ifndef JEESDP_TESTS_ORACLES_HPP_
#define JEESDP_TESTS_ORACLES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "jeesdp/corpus.hpp"

namespace jeesdp::oracle {

using Mat = Eigen::MatrixXd;

// Hop counts from an adjacency list; unreachable stays at n.
inline std::vector<std::vector<int>> floyd_warshall(int n, const std::vector<std::pair<int, int>>& edges) {
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [a, b] : edges) {
    if (a == b) continue;
    d[a][b] = 1;
    d[b][a] = 1;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  for (auto& row : d) {
    for (auto& v : row) {
      if (v >= inf) v = n;
    }
  }
  return d;
}

// Minimum over token pairs, n when the spans share a token or nothing connects.
inline int span_length(const std::vector<std::vector<int>>& d, const Span& a, const Span& b, int n) {
  if (a.overlaps(b)) return n;
  int best = n;
  for (int i = a.start; i < a.end; ++i) {
    for (int j = b.start; j < b.end; ++j) best = std::min(best, d[i][j]);
  }
  return best;
}

struct RandomGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

// Random forest plus a few extra edges, so both trees and cyclic or
// disconnected graphs occur.
inline RandomGraph random_graph(std::mt19937_64& rng, int max_nodes = 12) {
  RandomGraph g;
  g.n = std::uniform_int_distribution<int>(1, max_nodes)(rng);
  std::bernoulli_distribution keep(0.85);
  for (int v = 1; v < g.n; ++v) {
    if (keep(rng)) g.edges.emplace_back(v, std::uniform_int_distribution<int>(0, v - 1)(rng));
  }
  const int extra = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int e = 0; e < extra && g.n > 1; ++e) {
    std::uniform_int_distribution<int> any(0, g.n - 1);
    g.edges.emplace_back(any(rng), any(rng));
  }
  return g;
}

inline Span random_span(std::mt19937_64& rng, int n) {
  const int start = std::uniform_int_distribution<int>(0, n - 1)(rng);
  const int len = std::uniform_int_distribution<int>(1, std::min(3, n - start))(rng);
  return {start, start + len};
}

// Same-padded sliding window over every row, ReLU, then the column max of
// each of the three segments split after positions p1 <= p2. An empty
// segment takes relu(bias).
inline Mat dmcnn(const Mat& x, const Mat& weight, const Mat& bias, int window, int trigger_pos, int argument_pos) {
  const int length = static_cast<int>(x.rows());
  const int width = static_cast<int>(x.cols());
  const int filters = static_cast<int>(weight.cols());
  const int left = window / 2;
  Mat conv(length, filters);
  for (int r = 0; r < length; ++r) {
    for (int f = 0; f < filters; ++f) {
      double acc = bias(0, f);
      for (int o = 0; o < window; ++o) {
        const int src = r + o - left;
        if (src < 0 || src >= length) continue;
        for (int c = 0; c < width; ++c) acc += x(src, c) * weight(o * width + c, f);
      }
      conv(r, f) = std::max(0.0, acc);
    }
  }
  const int p1 = std::min(trigger_pos, argument_pos);
  const int p2 = std::max(trigger_pos, argument_pos);
  const int bounds[3][2] = {{0, p1 + 1}, {p1 + 1, p2 + 1}, {p2 + 1, length}};
  Mat out(1, 3 * filters);
  for (int s = 0; s < 3; ++s) {
    for (int f = 0; f < filters; ++f) {
      double best = -std::numeric_limits<double>::infinity();
      for (int r = bounds[s][0]; r < bounds[s][1]; ++r) best = std::max(best, conv(r, f));
      if (bounds[s][0] >= bounds[s][1]) best = std::max(0.0, bias(0, f));
      out(0, s * filters + f) = best;
    }
  }
  return out;
}

struct AttentionOracle {
  Mat scores;      // n_e x levels
  Mat aggregated;  // n_e x n_o
};

// levels[d] is n_e x n_o; w3 is n_o x 1.
inline AttentionOracle attention(const std::vector<Mat>& levels, const Mat& w3, double b3, const Mat& z) {
  const auto ne = levels.front().rows();
  const auto width = levels.front().cols();
  const auto nd = static_cast<Eigen::Index>(levels.size());
  AttentionOracle out{Mat::Zero(ne, nd), Mat::Zero(ne, width)};
  for (Eigen::Index j = 0; j < ne; ++j) {
    std::vector<double> logit(static_cast<std::size_t>(nd));
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index d = 0; d < nd; ++d) {
      double dot = b3;
      for (Eigen::Index c = 0; c < width; ++c) dot += levels[d](j, c) * w3(c, 0);
      logit[d] = z(0, d) * std::tanh(dot);
      top = std::max(top, logit[d]);
    }
    double total = 0.0;
    for (Eigen::Index d = 0; d < nd; ++d) total += std::exp(logit[d] - top);
    for (Eigen::Index d = 0; d < nd; ++d) {
      const double s = std::exp(logit[d] - top) / total;
      out.scores(j, d) = s;
      for (Eigen::Index c = 0; c < width; ++c) out.aggregated(j, c) += s * levels[d](j, c);
    }
  }
  return out;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// One LSTM direction by the textbook recurrence; gates [i | f | o | g].
inline Mat lstm(const Mat& x, const Mat& wx, const Mat& wh, const Mat& b, bool reverse) {
  const auto n = x.rows();
  const auto h = wh.rows();
  Mat out = Mat::Zero(n, h);
  std::vector<double> state(static_cast<std::size_t>(h), 0.0), cell(static_cast<std::size_t>(h), 0.0);
  for (Eigen::Index step = 0; step < n; ++step) {
    const auto t = reverse ? n - 1 - step : step;
    std::vector<double> pre(static_cast<std::size_t>(4 * h));
    for (Eigen::Index g = 0; g < 4 * h; ++g) {
      double v = b(0, g);
      for (Eigen::Index c = 0; c < x.cols(); ++c) v += x(t, c) * wx(c, g);
      for (Eigen::Index k = 0; k < h; ++k) v += state[k] * wh(k, g);
      pre[g] = v;
    }
    for (Eigen::Index k = 0; k < h; ++k) {
      const double i = sigmoid(pre[k]);
      const double f = sigmoid(pre[h + k]);
      const double o = sigmoid(pre[2 * h + k]);
      const double g = std::tanh(pre[3 * h + k]);
      cell[k] = f * cell[k] + i * g;
      state[k] = o * std::tanh(cell[k]);
      out(t, k) = state[k];
    }
  }
  return out;
}

}  // namespace jeesdp::oracle

#endif  // JEESDP_TESTS_ORACLES_HPP_
