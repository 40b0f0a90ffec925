#include "spreadlab/rewire.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>
#include <vector>

#include "spreadlab/error.hpp"
#include "spreadlab/rng.hpp"

namespace spreadlab::rewire {

namespace {

std::uint64_t key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

SpatialGraph with_edges(const SpatialGraph& g, std::vector<std::pair<NodeId, NodeId>> edges) {
  const auto c = g.coordinates();
  const auto w = g.weights();
  return SpatialGraph(g.metric(), g.dim(), {c.begin(), c.end()}, {w.begin(), w.end()}, std::move(edges));
}

double mean_length(const SpatialGraph& g) {
  double s = 0.0;
  for (const auto& e : g.edges()) s += e.length;
  return s / static_cast<double>(g.num_edges());
}

}  // namespace

RewireResult switch_rewire(const SpatialGraph& g, std::size_t sweeps, std::uint64_t seed) {
  if (sweeps == 0) throw ValidationError("switch_rewire: sweeps must be at least 1");
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges()) edges.emplace_back(e.u, e.v);

  RewireResult out;
  const std::size_t m = edges.size();
  if (m < 2) {
    out.graph = with_edges(g, std::move(edges));
    out.warning = "switch_rewire: fewer than two edges, graph left unchanged";
    return out;
  }

  std::unordered_set<std::uint64_t> present;
  present.reserve(2 * m);
  for (const auto& [u, v] : edges) present.insert(key(u, v));

  auto rng = Rng::stream(seed, 0);
  const std::uint64_t total = static_cast<std::uint64_t>(sweeps) * m;
  for (std::uint64_t step = 0; step < total; ++step) {
    const auto i = static_cast<std::size_t>(rng.below(m));
    auto j = static_cast<std::size_t>(rng.below(m - 1));
    if (j >= i) ++j;
    auto [u, v] = edges[i];
    auto [u2, v2] = edges[j];
    if (rng.below(2) == 1) std::swap(u2, v2);
    ++out.proposals;
    if (u == u2 || v == v2) continue;
    const std::uint64_t a = key(u, u2), b = key(v, v2);
    const std::uint64_t old_a = key(u, v), old_b = key(edges[j].first, edges[j].second);
    if (a == b) continue;
    if ((a == old_a && b == old_b) || (a == old_b && b == old_a)) continue;
    const bool a_free = !present.count(a) || a == old_a || a == old_b;
    const bool b_free = !present.count(b) || b == old_a || b == old_b;
    if (!a_free || !b_free) continue;
    present.erase(old_a);
    present.erase(old_b);
    present.insert(a);
    present.insert(b);
    edges[i] = {std::min(u, u2), std::max(u, u2)};
    edges[j] = {std::min(v, v2), std::max(v, v2)};
    ++out.accepted;
  }
  std::sort(edges.begin(), edges.end());
  out.graph = with_edges(g, std::move(edges));
  return out;
}

MixingDiagnostic mixing_diagnostic(const SpatialGraph& original, const SpatialGraph& rewired) {
  if (original.num_nodes() != rewired.num_nodes() || original.dim() != rewired.dim() ||
      !std::ranges::equal(original.coordinates(), rewired.coordinates())) {
    throw ValidationError("mixing_diagnostic: graphs have different node sets");
  }
  MixingDiagnostic d;
  std::unordered_set<std::uint64_t> a;
  a.reserve(original.num_edges());
  for (const auto& e : original.edges()) a.insert(key(e.u, e.v));
  std::size_t shared = 0;
  for (const auto& e : rewired.edges()) shared += a.count(key(e.u, e.v));
  const std::size_t uni = original.num_edges() + rewired.num_edges() - shared;
  d.edge_jaccard = uni == 0 ? 1.0 : static_cast<double>(shared) / static_cast<double>(uni);
  d.mean_len_ratio = original.num_edges() == 0 || rewired.num_edges() == 0
                         ? NAN
                         : mean_length(rewired) / mean_length(original);
  d.degree_seq_equal = std::ranges::equal(original.degrees(), rewired.degrees());
  return d;
}

}  // namespace spreadlab::rewire
