#include "spreadlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spreadlab/error.hpp"

namespace spreadlab {

SpatialGraph::SpatialGraph(Metric metric, std::size_t dim, std::vector<double> coords,
                           std::vector<double> weights,
                           std::vector<std::pair<NodeId, NodeId>> edges)
    : metric_(std::move(metric)), dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  metric_.validate(dim_);
  if (coords_.size() % dim_ != 0) throw ValidationError("coordinate count is not a multiple of dim");
  const std::size_t n = coords_.size() / dim_;
  if (n >= kNoNode) throw ValidationError("too many nodes");
  if (!weights_.empty() && weights_.size() != n) {
    throw ValidationError("weight count does not match node count");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("node weights must be positive");
  }

  for (auto& [a, b] : edges) {
    if (a >= n || b >= n) throw ValidationError("edge endpoint out of range");
    if (a == b) throw ValidationError("self-loop at node " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw ValidationError("duplicate edge " + std::to_string(dup->first) + "-" +
                          std::to_string(dup->second));
  }
  if (edges.size() >= std::numeric_limits<EdgeId>::max()) throw ValidationError("too many edges");

  edges_.resize(edges.size());
  degree_.assign(n, 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    edges_[e] = {a, b, distance(a, b)};
    ++degree_[a];
    ++degree_[b];
  }
  edges.clear();
  edges.shrink_to_fit();

  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + degree_[v];
  arcs_.resize(offsets_[n]);
  std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    arcs_[fill[edge.u]++] = {edge.v, e};
    arcs_[fill[edge.v]++] = {edge.u, e};
  }
}

ComponentLabeling connected_components(const SpatialGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> parent(n);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto find = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Edge& e : g.edges()) {
    NodeId a = find(e.u);
    NodeId b = find(e.v);
    if (a == b) continue;
    // Smaller root wins so the root is always the component's minimum id.
    if (a < b) {
      parent[b] = a;
    } else {
      parent[a] = b;
    }
  }

  ComponentLabeling out;
  out.label.assign(n, 0);
  std::vector<std::uint32_t> root_label(n, std::numeric_limits<std::uint32_t>::max());
  for (NodeId v = 0; v < n; ++v) {
    const NodeId r = find(v);
    if (root_label[r] == std::numeric_limits<std::uint32_t>::max()) {
      root_label[r] = static_cast<std::uint32_t>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.label[v] = root_label[r];
    ++out.sizes[root_label[r]];
  }
  for (std::uint32_t c = 0; c < out.sizes.size(); ++c) {
    if (out.sizes[c] > out.sizes[out.largest]) out.largest = c;
  }
  return out;
}

DegreeStats degree_stats(const SpatialGraph& g) {
  DegreeStats s;
  const std::size_t n = g.num_nodes();
  if (n == 0) return s;
  s.min = std::numeric_limits<std::uint32_t>::max();
  for (std::uint32_t k : g.degrees()) {
    s.min = std::min(s.min, k);
    s.max = std::max(s.max, k);
  }
  s.histogram.assign(s.max + 1, 0);
  for (std::uint32_t k : g.degrees()) ++s.histogram[k];
  s.mean = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(n);
  return s;
}

Subgraph induced_subgraph(const SpatialGraph& g, const std::vector<bool>& keep) {
  if (keep.size() != g.num_nodes()) throw ValidationError("keep mask size does not match graph");
  Subgraph out;
  std::vector<NodeId> new_id(g.num_nodes(), kNoNode);
  std::vector<double> coords;
  std::vector<double> weights;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!keep[v]) continue;
    new_id[v] = static_cast<NodeId>(out.original_id.size());
    out.original_id.push_back(v);
    auto p = g.position(v);
    coords.insert(coords.end(), p.begin(), p.end());
    if (g.has_weights()) weights.push_back(g.weight(v));
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const Edge& e : g.edges()) {
    if (keep[e.u] && keep[e.v]) edges.emplace_back(new_id[e.u], new_id[e.v]);
  }
  out.graph = SpatialGraph(g.metric(), g.dim(), std::move(coords), std::move(weights), std::move(edges));
  return out;
}

Subgraph largest_component(const SpatialGraph& g) {
  const ComponentLabeling cc = connected_components(g);
  std::vector<bool> keep(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) keep[v] = cc.label[v] == cc.largest;
  return induced_subgraph(g, keep);
}

}  // namespace spreadlab
