#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "spreadlab/graph.hpp"

namespace spreadlab::spread {

enum class PenaltyBase { Weight, Degree };

/// Transmission-rate penalties: an edge u->v of length len gets cost
/// (Y / beta) * b_u^mu * b_v^nu * max(len, 1)^zeta with Y ~ Exp(1), where b
/// is the node weight or degree.
struct PenaltyParams {
  double mu = 0.0;
  std::optional<double> nu;  // defaults to mu
  double zeta = 0.0;
  double beta = 1.0;
  PenaltyBase base = PenaltyBase::Weight;

  double receiver_exponent() const { return nu.value_or(mu); }
  bool symmetric() const { return receiver_exponent() == mu; }
  void validate() const;
};

/// Per-edge draws and costs, indexed by EdgeId. `forward` is the cost of
/// u->v for the stored orientation u < v; `backward` is v->u and is left
/// empty when the penalties are symmetric.
struct CostAssignment {
  std::vector<double> y;
  std::vector<double> forward;
  std::vector<double> backward;

  bool symmetric() const { return backward.empty(); }
  double cost(EdgeId e, bool from_u) const {
    return from_u || backward.empty() ? forward[e] : backward[e];
  }
};

CostAssignment assign_costs(const SpatialGraph& g, const PenaltyParams& p, std::uint64_t seed);

inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

struct SpreadResult {
  NodeId source = 0;
  std::vector<double> times;          // infinity when not reached
  std::vector<std::uint32_t> order;   // rank of infection, kUnreached otherwise
  std::vector<NodeId> predecessor;    // kNoNode for the source and unreached nodes
  std::vector<NodeId> sequence;       // nodes in infection order
  std::uint64_t seed = 0;

  std::size_t reached() const { return sequence.size(); }
};

struct SpreadOptions {
  /// Stop once this many nodes are infected; the rest stay unreached.
  std::size_t max_reached = std::numeric_limits<std::size_t>::max();
};

/// Dijkstra over the edge costs. Ties in time are broken by node id.
SpreadResult spread_from(const SpatialGraph& g, const CostAssignment& costs, NodeId source,
                         const SpreadOptions& opts = {});

/// Number of nodes infected at or before t.
std::size_t infected_by(const SpreadResult& r, double t);

struct EpidemicCurve {
  std::vector<std::uint64_t> counts;
  std::vector<double> times;  // times[i] = time of the counts[i]-th infection
  std::uint64_t total = 0;
};

/// Counts 1..31, then every count whose binary expansion has at most five
/// significant bits, then `total`.
std::vector<std::uint64_t> curve_sample_counts(std::uint64_t total);

EpidemicCurve epidemic_curve(const SpreadResult& r);

struct QuantileTable {
  std::vector<std::uint64_t> counts;
  std::vector<double> probs;
  std::vector<std::vector<double>> values;  // values[q][i]
};

inline const std::vector<double> kDefaultQuantiles{0.5, 0.25, 0.75};

/// Per-count quantiles (linear interpolation between order statistics)
/// across curves that share a sampling grid.
QuantileTable curve_quantiles(const std::vector<EpidemicCurve>& curves,
                              const std::vector<double>& probs = kDefaultQuantiles);

/// Quantile of a sample with linear interpolation between order statistics.
double quantile(std::vector<double> sample, double prob);

/// First sampled time at which ceil(frac * total) nodes are infected.
double saturation_time(const EpidemicCurve& c, double frac);

/// Nodes from the source to target along the shortest-path tree.
std::optional<std::vector<NodeId>> infection_path(const SpreadResult& r, NodeId target);

struct BoundingBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct HeatmapGrid {
  std::size_t boxes = 0;
  BoundingBox box;
  /// Row-major by (by, bx); NaN marks a box with no reached node.
  std::vector<double> rank;
  double at(std::size_t bx, std::size_t by) const { return rank[by * boxes + bx]; }
};

/// Splits the plane into boxes_per_side^2 boxes and records, for each box,
/// the normalised infection rank of its earliest infected node. Ranks run
/// over reached nodes inside the crop, 0 for the first and 1 for the last.
/// Torus graphs are recentred so that the source sits in the middle and the
/// default box is the whole torus; otherwise the default box is the
/// bounding box of all nodes.
HeatmapGrid heatmap_grid(const SpreadResult& r, const SpatialGraph& g, std::size_t boxes_per_side,
                         std::optional<BoundingBox> crop = std::nullopt);

/// Position used by heatmap_grid for node v (recentred on torus graphs).
std::array<double, 2> heatmap_position(const SpreadResult& r, const SpatialGraph& g, NodeId v);

/// One epidemic per run on a shared graph; run r uses seed mix_seed(seed, r).
/// Runs are distributed over `threads` workers; results are in run order.
std::vector<SpreadResult> run_epidemics(const SpatialGraph& g, const PenaltyParams& p,
                                        NodeId source, std::size_t runs, std::uint64_t seed,
                                        unsigned threads = 1, const SpreadOptions& opts = {});

}  // namespace spreadlab::spread
