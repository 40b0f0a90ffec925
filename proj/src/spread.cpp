#include "spreadlab/spread.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "spreadlab/error.hpp"
#include "spreadlab/parallel.hpp"
#include "spreadlab/rng.hpp"

namespace spreadlab::spread {

void PenaltyParams::validate() const {
  const double nu_v = receiver_exponent();
  if (!std::isfinite(mu) || !std::isfinite(nu_v) || !std::isfinite(zeta))
    throw ValidationError("penalty exponents must be finite");
  if (mu < 0 || nu_v < 0 || zeta < 0) throw ValidationError("penalty exponents must be >= 0");
  if (!(beta > 0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
}

CostAssignment assign_costs(const SpatialGraph& g, const PenaltyParams& p, std::uint64_t seed) {
  p.validate();
  if (p.base == PenaltyBase::Weight && !g.has_weights() && g.num_edges() > 0)
    throw ValidationError("weight-based penalties need node weights; use the degree base");
  const double nu = p.receiver_exponent();
  auto base = [&](NodeId v) {
    return p.base == PenaltyBase::Weight ? g.weight(v) : static_cast<double>(g.degree(v));
  };

  Rng rng = Rng::stream(seed, 0);
  CostAssignment c;
  const std::size_t m = g.num_edges();
  c.y.resize(m);
  c.forward.resize(m);
  if (!p.symmetric()) c.backward.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    const Edge& edge = g.edge(static_cast<EdgeId>(e));
    const double y = rng.exponential();
    c.y[e] = y;
    const double scaled = y / p.beta;
    const double dist = p.zeta == 0.0 ? 1.0 : std::pow(std::max(edge.length, 1.0), p.zeta);
    const double bu = base(edge.u), bv = base(edge.v);
    c.forward[e] = scaled * (std::pow(bu, p.mu) * std::pow(bv, nu) * dist);
    if (!c.backward.empty()) c.backward[e] = scaled * (std::pow(bv, p.mu) * std::pow(bu, nu) * dist);
  }
  return c;
}

SpreadResult spread_from(const SpatialGraph& g, const CostAssignment& costs, NodeId source,
                         const SpreadOptions& opts) {
  const std::size_t n = g.num_nodes();
  if (source >= n) throw ValidationError("source node " + std::to_string(source) + " out of range");
  if (costs.forward.size() != g.num_edges())
    throw ValidationError("cost assignment does not match the graph");

  SpreadResult r;
  r.source = source;
  r.times.assign(n, std::numeric_limits<double>::infinity());
  r.order.assign(n, kUnreached);
  r.predecessor.assign(n, kNoNode);

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  r.times[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty() && r.sequence.size() < opts.max_reached) {
    const auto [t, v] = heap.top();
    heap.pop();
    if (r.order[v] != kUnreached || t > r.times[v]) continue;
    r.order[v] = static_cast<std::uint32_t>(r.sequence.size());
    r.sequence.push_back(v);
    for (const auto& arc : g.neighbors(v)) {
      if (r.order[arc.to] != kUnreached) continue;
      const double nt = t + costs.cost(arc.edge, g.edge(arc.edge).u == v);
      if (nt < r.times[arc.to]) {
        r.times[arc.to] = nt;
        r.predecessor[arc.to] = v;
        heap.emplace(nt, arc.to);
      }
    }
  }
  // Tentative labels of nodes never popped are not infection times.
  for (NodeId v = 0; v < n; ++v)
    if (r.order[v] == kUnreached) {
      r.times[v] = std::numeric_limits<double>::infinity();
      r.predecessor[v] = kNoNode;
    }
  return r;
}

std::size_t infected_by(const SpreadResult& r, double t) {
  const auto it = std::partition_point(r.sequence.begin(), r.sequence.end(),
                                       [&](NodeId v) { return r.times[v] <= t; });
  return static_cast<std::size_t>(it - r.sequence.begin());
}

std::vector<std::uint64_t> curve_sample_counts(std::uint64_t total) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t c = 1; c <= std::min<std::uint64_t>(31, total); ++c) out.push_back(c);
  for (int k = 5; k < 63 && (std::uint64_t{1} << k) <= total; ++k)
    for (std::uint64_t a = 0; a < 16; ++a) {
      const std::uint64_t c = (std::uint64_t{1} << k) + (a << (k - 4));
      if (c > total) break;
      out.push_back(c);
    }
  if (total > 0 && out.back() != total) out.push_back(total);
  return out;
}

EpidemicCurve epidemic_curve(const SpreadResult& r) {
  if (r.sequence.empty()) throw ValidationError("epidemic_curve: no reached node");
  EpidemicCurve c;
  c.total = r.sequence.size();
  c.counts = curve_sample_counts(c.total);
  c.times.reserve(c.counts.size());
  for (auto k : c.counts) c.times.push_back(r.times[r.sequence[k - 1]]);
  return c;
}

double quantile(std::vector<double> sample, double prob) {
  if (sample.empty()) throw ValidationError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ValidationError("quantile probability outside [0, 1]");
  std::sort(sample.begin(), sample.end());
  const double h = prob * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  if (lo == hi || sample[lo] == sample[hi]) return sample[lo];
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

QuantileTable curve_quantiles(const std::vector<EpidemicCurve>& curves,
                              const std::vector<double>& probs) {
  if (curves.empty()) throw ValidationError("curve_quantiles: no curves");
  for (const auto& c : curves)
    if (c.counts != curves.front().counts)
      throw ValidationError("curve_quantiles: curves have different sampling grids");
  QuantileTable t;
  t.counts = curves.front().counts;
  t.probs = probs;
  t.values.assign(probs.size(), std::vector<double>(t.counts.size()));
  std::vector<double> column(curves.size());
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r].times[i];
    for (std::size_t q = 0; q < probs.size(); ++q) t.values[q][i] = quantile(column, probs[q]);
  }
  return t;
}

double saturation_time(const EpidemicCurve& c, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw ValidationError("saturation_time: frac must be in (0, 1]");
  const auto target = static_cast<std::uint64_t>(std::ceil(frac * static_cast<double>(c.total)));
  if (target < 1) throw ValidationError("saturation_time: target count below 1");
  const auto it = std::lower_bound(c.counts.begin(), c.counts.end(), target);
  if (it == c.counts.end()) throw ValidationError("saturation_time: target beyond the curve");
  return c.times[static_cast<std::size_t>(it - c.counts.begin())];
}

std::optional<std::vector<NodeId>> infection_path(const SpreadResult& r, NodeId target) {
  if (target >= r.order.size() || r.order[target] == kUnreached) return std::nullopt;
  std::vector<NodeId> path{target};
  while (path.back() != r.source) path.push_back(r.predecessor[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::array<double, 2> heatmap_position(const SpreadResult& r, const SpatialGraph& g, NodeId v) {
  const auto pos = g.position(v);
  std::array<double, 2> out{pos[0], pos[1]};
  if (g.metric().kind == MetricKind::TorusL2) {
    const auto src = g.position(r.source);
    for (int k = 0; k < 2; ++k) {
      const double side = g.metric().side[k];
      double x = std::fmod(pos[k] - src[k] + 1.5 * side, side);
      if (x < 0) x += side;
      out[k] = x;
    }
  }
  return out;
}

HeatmapGrid heatmap_grid(const SpreadResult& r, const SpatialGraph& g, std::size_t boxes_per_side,
                         std::optional<BoundingBox> crop) {
  if (g.dim() != 2) throw ValidationError("heatmap_grid needs 2-dimensional positions");
  if (boxes_per_side == 0) throw ValidationError("heatmap_grid: boxes_per_side must be positive");
  BoundingBox box;
  if (crop) {
    box = *crop;
  } else if (g.metric().kind == MetricKind::TorusL2) {
    box = {0.0, 0.0, g.metric().side[0], g.metric().side[1]};
  } else if (g.num_nodes() > 0) {
    box = {INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      const auto p = g.position(v);
      box.x0 = std::min(box.x0, p[0]);
      box.x1 = std::max(box.x1, p[0]);
      box.y0 = std::min(box.y0, p[1]);
      box.y1 = std::max(box.y1, p[1]);
    }
    // A single point or a line still gets a box of positive extent.
    if (box.x1 <= box.x0) box.x1 = box.x0 + 1.0;
    if (box.y1 <= box.y0) box.y1 = box.y0 + 1.0;
  }
  if (!(box.x1 > box.x0 && box.y1 > box.y0) || !std::isfinite(box.x1 - box.x0) ||
      !std::isfinite(box.y1 - box.y0))
    throw ValidationError("heatmap_grid: degenerate crop box");

  const std::size_t b = boxes_per_side;
  HeatmapGrid grid;
  grid.boxes = b;
  grid.box = box;
  grid.rank.assign(b * b, std::numeric_limits<double>::quiet_NaN());

  auto cell = [&](double x, double lo, double hi) {
    const auto i = static_cast<std::size_t>(std::floor((x - lo) / (hi - lo) * static_cast<double>(b)));
    return std::min(i, b - 1);
  };
  std::vector<std::size_t> box_of;
  box_of.reserve(r.sequence.size());
  for (NodeId v : r.sequence) {
    const auto p = heatmap_position(r, g, v);
    if (p[0] < box.x0 || p[0] > box.x1 || p[1] < box.y0 || p[1] > box.y1) continue;
    box_of.push_back(cell(p[1], box.y0, box.y1) * b + cell(p[0], box.x0, box.x1));
  }
  const double denom = box_of.size() > 1 ? static_cast<double>(box_of.size() - 1) : 1.0;
  for (std::size_t i = 0; i < box_of.size(); ++i)
    if (std::isnan(grid.rank[box_of[i]])) grid.rank[box_of[i]] = static_cast<double>(i) / denom;
  return grid;
}

std::vector<SpreadResult> run_epidemics(const SpatialGraph& g, const PenaltyParams& p,
                                        NodeId source, std::size_t runs, std::uint64_t seed,
                                        unsigned threads, const SpreadOptions& opts) {
  p.validate();
  std::vector<SpreadResult> out(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    const std::uint64_t run_seed = mix_seed(seed, r);
    const CostAssignment costs = assign_costs(g, p, run_seed);
    out[r] = spread_from(g, costs, source, opts);
    out[r].seed = run_seed;
  });
  return out;
}

}  // namespace spreadlab::spread
