#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spreadlab/geometry.hpp"

namespace spreadlab {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Edge {
  NodeId u = 0;  // u < v
  NodeId v = 0;
  double length = 0.0;
};

/// Read-only view of one node.
struct NodeRecord {
  NodeId id = 0;
  std::span<const double> pos;
  double weight = 1.0;
  std::uint32_t degree = 0;
};

/// Undirected simple graph with node positions, optional node weights and
/// precomputed edge lengths. Immutable after construction, so it can be
/// shared freely between threads.
///
/// Edges are stored once, as (u, v) with u < v, sorted lexicographically;
/// EdgeId indexes that order. Adjacency is kept in CSR form.
class SpatialGraph {
 public:
  struct Arc {
    NodeId to;
    EdgeId edge;
  };

  SpatialGraph() = default;

  /// `coords` holds dim values per node. `weights` is either empty (no
  /// weights; every node reports 1.0) or one positive value per node.
  /// Throws ValidationError on self-loops, duplicate edges, out-of-range
  /// endpoints or an inconsistent metric.
  SpatialGraph(Metric metric, std::size_t dim, std::vector<double> coords,
               std::vector<double> weights, std::vector<std::pair<NodeId, NodeId>> edges);

  std::size_t num_nodes() const { return degree_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t dim() const { return dim_; }
  const Metric& metric() const { return metric_; }

  std::span<const double> position(NodeId v) const {
    return {coords_.data() + static_cast<std::size_t>(v) * dim_, dim_};
  }
  bool has_weights() const { return !weights_.empty(); }
  double weight(NodeId v) const { return weights_.empty() ? 1.0 : weights_[v]; }
  std::uint32_t degree(NodeId v) const { return degree_[v]; }
  NodeRecord node(NodeId v) const { return {v, position(v), weight(v), degree_[v]}; }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Arc> neighbors(NodeId v) const {
    return {arcs_.data() + offsets_[v], arcs_.data() + offsets_[v + 1]};
  }

  std::span<const double> coordinates() const { return coords_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const std::uint32_t> degrees() const { return degree_; }

  /// Distance between two nodes under the graph metric.
  double distance(NodeId a, NodeId b) const { return metric_.distance(position(a), position(b)); }

 private:
  Metric metric_;
  std::size_t dim_ = 1;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::vector<std::uint32_t> degree_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Arc> arcs_;
};

struct ComponentLabeling {
  std::vector<std::uint32_t> label;  // per node
  std::vector<std::size_t> sizes;    // per label
  std::uint32_t largest = 0;         // label of the largest component (smallest label on ties)
};

/// Labels are numbered in order of each component's smallest node id.
ComponentLabeling connected_components(const SpatialGraph& g);

struct DegreeStats {
  double mean = 0.0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  std::vector<std::uint64_t> histogram;  // histogram[k] = #nodes of degree k
};

DegreeStats degree_stats(const SpatialGraph& g);

struct Subgraph {
  SpatialGraph graph;
  std::vector<NodeId> original_id;  // new id -> id in the parent graph
};

/// Subgraph induced by the nodes with keep[v] == true, relabelled densely in
/// increasing original id.
Subgraph induced_subgraph(const SpatialGraph& g, const std::vector<bool>& keep);
Subgraph largest_component(const SpatialGraph& g);

}  // namespace spreadlab
