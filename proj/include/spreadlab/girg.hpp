#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "spreadlab/graph.hpp"
#include "spreadlab/rng.hpp"

namespace spreadlab::girg {

inline constexpr double kThreshold = std::numeric_limits<double>::infinity();

/// Geometric inhomogeneous random graph on the torus [0, n^(1/d))^d with a
/// Poisson(n) number of nodes and Pareto(tau) weights. alpha may be
/// infinite (threshold model).
struct GirgParams {
  double n = 1000.0;
  int d = 2;
  double tau = 2.5;
  double alpha = 2.0;
  double c = 1.0;
  std::uint64_t seed = 0;
  /// Refuse to sample when the drawn node count exceeds this.
  std::size_t max_nodes = 50'000'000;
  /// Refuse to continue once this many edges have been produced.
  std::size_t max_edges = 400'000'000;

  void validate() const;
  double side() const;
};

/// Pareto draw with density (tau-1) w^-tau on [1, inf) from a uniform u in (0, 1].
double pareto_from_uniform(double u, double tau);

/// i.i.d. Pareto(tau) weights by inverse transform.
std::vector<double> sample_weights(std::size_t count, double tau, Rng& rng);

/// c * min{(wu*wv / dist^d)^alpha, 1}; c * [wu*wv >= dist^d] when alpha is
/// infinite; c when dist == 0.
double connection_probability(double wu, double wv, double dist, int d, double alpha, double c);

/// Node set shared by both samplers: node count, positions, weights. A
/// given seed yields the same vertices in either sampler.
struct VertexSet {
  std::vector<double> coords;   // d per node
  std::vector<double> weights;
};
VertexSet sample_vertices(const GirgParams& p);

/// Exact sampler in expected time linear in nodes + edges. Node pairs are
/// visited through a hierarchy of torus cells per pair of weight layers:
/// nearby cell pairs are enumerated pair by pair, distant ones are sampled
/// by geometric jumps against an upper bound and then thinned to the exact
/// probability. Deterministic for a fixed seed regardless of `threads`.
SpatialGraph sample_girg(const GirgParams& p, unsigned threads = 1);

/// Reference O(N^2) sampler over all pairs. Refuses n > 10^4.
SpatialGraph sample_girg_naive(const GirgParams& p);

inline constexpr double kNaiveMaxN = 1e4;

}  // namespace spreadlab::girg
