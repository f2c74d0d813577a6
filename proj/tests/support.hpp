#pragma once

#include "datos/engine.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"
#include "datos/refsolver.hpp"

namespace datos::testing {

// Graph plus its lazy Metropolis gossip matrix, kept together so the channel
// can hold references to both.
struct Net {
  NetworkGraph graph;
  GossipMatrix gossip;

  explicit Net(NetworkGraph g, double c = 1.0 / 3.0)
      : graph(std::move(g)), gossip(lazy_mix(metropolis_weights(graph), c)) {}
  GossipChannel channel() const { return GossipChannel(graph, gossip); }
};

inline Net er_net(int m, double p, std::uint64_t seed) { return Net(generate_erdos_renyi(m, p, seed)); }

inline ProblemInstance small_elastic(std::uint64_t seed, int m = 5, Eigen::Index n = 6, Eigen::Index d = 4,
                                     double lambda = 0.05) {
  return elastic_net(seed, m, n, d, lambda, default_gamma_schedule(m));
}

inline double max_abs(const Stack& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace datos::testing
