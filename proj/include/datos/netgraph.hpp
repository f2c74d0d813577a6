#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "datos/core.hpp"
#include "datos/rng.hpp"

namespace datos {

using Edge = std::pair<int, int>;

/// Undirected connected communication graph. Immutable after construction.
class NetworkGraph {
 public:
  /// Builds from an edge list. Duplicates and both orientations are merged;
  /// self-loops and out-of-range endpoints are rejected, as is a disconnected
  /// result.
  static NetworkGraph from_edges(int m, const std::vector<Edge>& edges) {
    if (m < 1) throw Error("graph: agent count must be positive");
    NetworkGraph g;
    g.m_ = m;
    g.neighbors_.assign(static_cast<std::size_t>(m), {});
    for (auto [i, j] : edges) {
      if (i < 0 || j < 0 || i >= m || j >= m)
        throw Error("graph: edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
      if (i == j) throw Error("graph: self-loop at agent " + std::to_string(i));
      g.neighbors_[static_cast<std::size_t>(i)].push_back(j);
      g.neighbors_[static_cast<std::size_t>(j)].push_back(i);
    }
    for (auto& nb : g.neighbors_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    for (int i = 0; i < m; ++i)
      for (int j : g.neighbors_[static_cast<std::size_t>(i)])
        if (i < j) g.edges_.emplace_back(i, j);
    if (!g.connected()) throw Error("graph: not connected");
    g.diameter_ = g.compute_diameter();
    return g;
  }

  int size() const { return m_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<int>& neighbors(int i) const { return neighbors_[static_cast<std::size_t>(i)]; }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  int diameter() const { return diameter_; }
  bool has_edge(int i, int j) const {
    const auto& nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
  }
  /// Number of rejected disconnected draws before this graph (generators only).
  int redraws() const { return redraws_; }
  void set_redraws(int n) { redraws_ = n; }

  /// Hop distances from `source` (BFS).
  std::vector<int> distances_from(int source) const {
    std::vector<int> dist(static_cast<std::size_t>(m_), -1);
    std::queue<int> frontier;
    dist[static_cast<std::size_t>(source)] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : neighbors(u)) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          frontier.push(v);
        }
      }
    }
    return dist;
  }

 private:
  bool connected() const {
    const auto dist = distances_from(0);
    return std::all_of(dist.begin(), dist.end(), [](int d) { return d >= 0; });
  }

  int compute_diameter() const {
    int best = 0;
    for (int s = 0; s < m_; ++s) {
      const auto dist = distances_from(s);
      best = std::max(best, *std::max_element(dist.begin(), dist.end()));
    }
    return best;
  }

  int m_ = 0;
  std::vector<std::vector<int>> neighbors_;
  std::vector<Edge> edges_;
  int diameter_ = 0;
  int redraws_ = 0;
};

/// Exact hop diameter via all-pairs BFS.
inline int graph_diameter(const NetworkGraph& g) {
  int best = 0;
  for (int s = 0; s < g.size(); ++s) {
    const auto dist = g.distances_from(s);
    best = std::max(best, *std::max_element(dist.begin(), dist.end()));
  }
  return best;
}

inline constexpr int kDefaultMaxRedraws = 10000;

/// Erdos-Renyi G(m, p). A disconnected draw is discarded and redrawn from
/// sub-seed derive_seed(seed, attempt); the attempt count is kept in redraws().
inline NetworkGraph generate_erdos_renyi(int m, double p, std::uint64_t seed,
                                         int max_redraws = kDefaultMaxRedraws) {
  if (m < 1) throw Error("erdos_renyi: m must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw Error("erdos_renyi: p must lie in (0, 1]");
  for (int attempt = 0; attempt <= max_redraws; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<Edge> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (rng.bernoulli(p)) edges.emplace_back(i, j);
    try {
      NetworkGraph g = NetworkGraph::from_edges(m, edges);
      g.set_redraws(attempt);
      return g;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("erdos_renyi: no connected draw after " + std::to_string(max_redraws) +
              " redraws (p too small for m)");
}

inline NetworkGraph path_graph(int m) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < m; ++i) e.emplace_back(i, i + 1);
  return NetworkGraph::from_edges(m, e);
}

inline NetworkGraph complete_graph(int m) {
  std::vector<Edge> e;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) e.emplace_back(i, j);
  return NetworkGraph::from_edges(m, e);
}

inline NetworkGraph star_graph(int m) {
  std::vector<Edge> e;
  for (int i = 1; i < m; ++i) e.emplace_back(0, i);
  return NetworkGraph::from_edges(m, e);
}

inline NetworkGraph ring_graph(int m) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < m; ++i) e.emplace_back(i, i + 1);
  if (m > 2) e.emplace_back(m - 1, 0);
  return NetworkGraph::from_edges(m, e);
}

/// Metropolis-Hastings weights: w_ij = 1 / (1 + max(deg_i, deg_j)) on edges.
inline Matrix metropolis_weights(const NetworkGraph& g) {
  const int m = g.size();
  Matrix w = Matrix::Zero(m, m);
  for (auto [i, j] : g.edges()) {
    const double v = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(i), g.degree(j))));
    w(i, j) = v;
    w(j, i) = v;
  }
  for (int i = 0; i < m; ++i) {
    double off = 0.0;
    for (int j : g.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return w;
}

/// Checks the base gossip-matrix properties (symmetric, row-stochastic,
/// nonnegative, positive diagonal) to tolerance `tol`. Returns an empty string
/// on success, otherwise a description of the first violation.
inline std::string check_gossip_base(const Matrix& w, double tol = 1e-12) {
  if (w.rows() != w.cols() || w.rows() == 0) return "not a nonempty square matrix";
  const Eigen::Index m = w.rows();
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > tol) return "not symmetric";
  if ((w.rowwise().sum().array() - 1.0).abs().maxCoeff() > tol) return "rows do not sum to 1";
  if (w.minCoeff() < -tol) return "negative entry";
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(w(i, i) > 0.0)) return "nonpositive diagonal at " + std::to_string(i);
  return {};
}

/// Sparsity compliance: w_ij > 0 exactly on edges (i != j), zero elsewhere.
inline bool compliant_with(const Matrix& w, const NetworkGraph& g) {
  const int m = g.size();
  if (w.rows() != m || w.cols() != m) return false;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const bool edge = g.has_edge(i, j);
      if (edge && !(w(i, j) > 0.0)) return false;
      if (!edge && w(i, j) != 0.0) return false;
    }
  return true;
}

/// W = (1 - c) I + c W~ together with its ingredients.
struct GossipMatrix {
  Matrix w_tilde;
  double c = 0.0;
  Matrix w;

  int size() const { return static_cast<int>(w.rows()); }
};

inline GossipMatrix lazy_mix(const Matrix& w_tilde, double c) {
  if (!(c > 0.0 && c < 0.5))
    throw Error("c = " + std::to_string(c) + " outside the open interval (0, 1/2)");
  if (auto why = check_gossip_base(w_tilde, 1e-10); !why.empty())
    throw Error("lazy_mix: invalid base matrix: " + why);
  GossipMatrix out;
  out.w_tilde = w_tilde;
  out.c = c;
  const auto m = w_tilde.rows();
  out.w = (1.0 - c) * Matrix::Identity(m, m) + c * w_tilde;
  return out;
}

/// Eigenvalues of a symmetric matrix in nonincreasing order.
inline Vector sym_eigenvalues_desc(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

/// Second-largest eigenvalue of a symmetric stochastic matrix. Returns 1 for
/// m = 1 (no spectral gap) and for matrices of disconnected graphs.
inline double second_eigenvalue(const Matrix& w_tilde) {
  if (w_tilde.rows() <= 1) return 1.0;
  const Vector ev = sym_eigenvalues_desc(w_tilde);
  return std::min(1.0, ev(1));
}

// Edge-list text format:
//   m=<int>
//   i j        (one 0-based undirected pair per line)
inline void write_edge_list(std::ostream& os, const NetworkGraph& g) {
  os << "m=" << g.size() << '\n';
  for (auto [i, j] : g.edges()) os << i << ' ' << j << '\n';
}

inline NetworkGraph read_edge_list(std::istream& is) {
  std::string line;
  int lineno = 0;
  int m = -1;
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (m < 0) {
      if (line.rfind("m=", 0) != 0) throw Error("edge list: missing header 'm=<int>' at line " + std::to_string(lineno));
      try {
        m = std::stoi(line.substr(2));
      } catch (const std::exception&) {
        throw Error("edge list: bad header at line " + std::to_string(lineno));
      }
      continue;
    }
    std::istringstream ls(line);
    int i = 0, j = 0;
    if (!(ls >> i >> j)) throw Error("edge list: malformed pair at line " + std::to_string(lineno));
    edges.emplace_back(i, j);
  }
  if (m < 0) throw Error("edge list: empty input");
  return NetworkGraph::from_edges(m, edges);
}

inline void save_edge_list(const std::string& path, const NetworkGraph& g) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_edge_list(os, g);
}

inline NetworkGraph load_edge_list(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_edge_list(is);
}

}  // namespace datos
