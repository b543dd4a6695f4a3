#include "jeesdp/graph_sdp.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace jeesdp {

DepGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  DepGraph g{IntMatrix::Zero(n, n)};
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::out_of_range("make_graph: edge out of range");
    if (a == b) continue;
    g.adjacency(a, b) = 1;
    g.adjacency(b, a) = 1;
  }
  return g;
}

DepGraph dependency_graph(const Sentence& s) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < s.size(); ++i) {
    const int h = s.tokens[static_cast<std::size_t>(i)].dep_head;
    if (h >= 0 && h != i && h < s.size()) edges.emplace_back(i, h);
  }
  return make_graph(s.size(), edges);
}

IntMatrix candidate_mask(const std::vector<Span>& spans, int n_w) {
  IntMatrix m = IntMatrix::Zero(static_cast<Eigen::Index>(spans.size()), n_w);
  for (std::size_t r = 0; r < spans.size(); ++r) {
    for (int k = std::max(0, spans[r].start); k < std::min(spans[r].end, n_w); ++k) {
      m(static_cast<Eigen::Index>(r), k) = 1;
    }
  }
  return m;
}

std::vector<int> AllPairsPaths::path_tokens(int i, int j) const {
  std::vector<int> walk;
  if (lengths(i, j) >= size() && i != j) return walk;
  for (int v = j; v != -1; v = v == i ? -1 : parent(i, v)) walk.push_back(v);
  std::reverse(walk.begin(), walk.end());
  return walk;
}

IntVector AllPairsPaths::path_mask(int i, int j) const {
  IntVector m = IntVector::Zero(size());
  for (int v : path_tokens(i, j)) m(v) = 1;
  return m;
}

AllPairsPaths bfs_all_pairs(const DepGraph& g) {
  const int n = g.size();
  AllPairsPaths out{IntMatrix::Constant(n, n, n), IntMatrix::Constant(n, n, -1)};
  std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (g.adjacency(a, b) != 0) neighbours[static_cast<std::size_t>(a)].push_back(b);
    }
  }
  std::deque<int> queue;
  for (int src = 0; src < n; ++src) {
    out.lengths(src, src) = 0;
    queue.assign(1, src);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : neighbours[static_cast<std::size_t>(u)]) {
        if (v == src || out.parent(src, v) != -1) continue;
        out.parent(src, v) = u;
        out.lengths(src, v) = out.lengths(src, u) + 1;
        queue.push_back(v);
      }
    }
  }
  return out;
}

namespace {

bool rows_overlap(const IntMatrix& a, int ra, const IntMatrix& b, int rb) {
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    if (a(ra, k) != 0 && b(rb, k) != 0) return true;
  }
  return false;
}

// Shortest token-to-token length between two candidate rows; the endpoints
// of the first strict improvement are returned through `from`, `to`.
int span_distance(const AllPairsPaths& paths, const IntMatrix& a, int ra, const IntMatrix& b, int rb,
                  int* from, int* to) {
  const int n = paths.size();
  int best = n;
  for (int k = 0; k < n; ++k) {
    if (a(ra, k) == 0) continue;
    for (int z = 0; z < n; ++z) {
      if (b(rb, z) == 0) continue;
      if (best > paths.lengths(k, z)) {
        best = paths.lengths(k, z);
        *from = k;
        *to = z;
      }
    }
  }
  return best;
}

void check_masks(const AllPairsPaths& paths, const IntMatrix& m, const char* what) {
  if (m.cols() != paths.size()) {
    throw std::invalid_argument(std::string(what) + " mask width does not match the graph size");
  }
}

}  // namespace

SdpResult compute_sdp(const AllPairsPaths& paths, const IntMatrix& triggers, const IntMatrix& arguments) {
  check_masks(paths, triggers, "trigger");
  check_masks(paths, arguments, "argument");
  const int n = paths.size();
  const auto nt = triggers.rows();
  const auto ne = arguments.rows();
  SdpResult out;
  out.sdp_len = IntMatrix::Constant(nt, ne, n);
  out.sdp.assign(static_cast<std::size_t>(nt), IntMatrix::Zero(ne, n));
  for (Eigen::Index i = 0; i < nt; ++i) {
    auto& block = out.sdp[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < ne; ++j) {
      if (!rows_overlap(triggers, static_cast<int>(i), arguments, static_cast<int>(j))) {
        int from = -1, to = -1;
        const int len = span_distance(paths, triggers, static_cast<int>(i), arguments, static_cast<int>(j),
                                      &from, &to);
        if (from >= 0) {
          out.sdp_len(i, j) = len;
          block.row(j) = paths.path_mask(from, to);
        }
      }
      block.row(j) = (block.row(j) + arguments.row(j) + triggers.row(i)).cwiseMin(1);
    }
  }
  return out;
}

SdpResult compute_sdp(const DepGraph& g, const IntMatrix& triggers, const IntMatrix& arguments) {
  return compute_sdp(bfs_all_pairs(g), triggers, arguments);
}

IntMatrix compute_argument_sdp_l(const AllPairsPaths& paths, const IntMatrix& arguments) {
  check_masks(paths, arguments, "argument");
  const int n = paths.size();
  const auto ne = arguments.rows();
  IntMatrix out = IntMatrix::Constant(ne, ne, n);
  for (Eigen::Index i = 0; i < ne; ++i) {
    out(i, i) = 0;
    for (Eigen::Index j = i + 1; j < ne; ++j) {
      if (rows_overlap(arguments, static_cast<int>(i), arguments, static_cast<int>(j))) continue;
      int from = -1, to = -1;
      const int len = span_distance(paths, arguments, static_cast<int>(i), arguments, static_cast<int>(j),
                                    &from, &to);
      out(i, j) = len;
      out(j, i) = len;
    }
  }
  return out;
}

IntMatrix compute_argument_sdp_l(const DepGraph& g, const IntMatrix& arguments) {
  return compute_argument_sdp_l(bfs_all_pairs(g), arguments);
}

}  // namespace jeesdp
