#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "spreadlab/error.hpp"
#include "spreadlab/girg.hpp"
#include "spreadlab/spread.hpp"

using namespace spreadlab;
using namespace spreadlab::spread;

namespace {

SpatialGraph random_connected_graph(std::mt19937_64& gen, std::size_t n, bool weights) {
  std::uniform_real_distribution<double> pos(0.0, 30.0), w(1.0, 5.0);
  std::vector<double> coords(2 * n), ws;
  for (auto& x : coords) x = pos(gen);
  if (weights)
    for (std::size_t i = 0; i < n; ++i) ws.push_back(w(gen));
  std::set<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 1; v < n; ++v) {
    const NodeId u = static_cast<NodeId>(gen() % v);
    edges.insert({u, v});
  }
  const std::size_t extra = gen() % (n * 2);
  for (std::size_t k = 0; k < extra; ++k) {
    NodeId a = static_cast<NodeId>(gen() % n), b = static_cast<NodeId>(gen() % n);
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  }
  return SpatialGraph(Metric::euclidean(), 2, coords, ws, {edges.begin(), edges.end()});
}

// Minimum cost over all simple paths from source, by depth-first enumeration.
std::vector<double> brute_force_times(const SpatialGraph& g, const CostAssignment& c, NodeId s) {
  std::vector<double> best(g.num_nodes(), INFINITY);
  std::vector<bool> on_path(g.num_nodes(), false);
  std::function<void(NodeId, double)> dfs = [&](NodeId v, double t) {
    best[v] = std::min(best[v], t);
    on_path[v] = true;
    for (const auto& arc : g.neighbors(v))
      if (!on_path[arc.to]) dfs(arc.to, t + c.cost(arc.edge, g.edge(arc.edge).u == v));
    on_path[v] = false;
  };
  dfs(s, 0.0);
  return best;
}

// A count is sampled iff it is below 32, or it has at most five significant bits.
bool sampled_by_bits(std::uint64_t c) {
  if (c < 32) return true;
  const int top = std::bit_width(c) - 1;
  return (c & ((std::uint64_t{1} << (top - 4)) - 1)) == 0;
}

SpatialGraph path_graph(std::size_t n) {
  std::vector<double> coords(2 * n, 0.0);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId v = 0; v < n; ++v) coords[2 * v] = v * 2.0;
  for (NodeId v = 0; v + 1 < n; ++v) e.push_back({v, v + 1});
  return SpatialGraph(Metric::euclidean(), 2, coords, {}, e);
}

CostAssignment fixed_costs(std::vector<double> c) {
  CostAssignment a;
  a.y = c;
  a.forward = std::move(c);
  return a;
}

}  // namespace

TEST_CASE("cost formula") {
  SUBCASE("penalties collapse to one") {
    const SpatialGraph g(Metric::euclidean(), 1, {0.0, 0.5}, {1.0, 1.0}, {{0, 1}});
    PenaltyParams p;
    p.mu = 1.3;
    p.zeta = 2.0;
    const auto c = assign_costs(g, p, 1);
    CHECK(c.forward[0] == c.y[0]);
  }
  SUBCASE("weights and length") {
    const SpatialGraph g(Metric::euclidean(), 1, {0.0, 10.0}, {2.0, 3.0}, {{0, 1}});
    PenaltyParams p;
    p.mu = 1;
    p.zeta = 2;
    const auto c = assign_costs(g, p, 1);
    CHECK(c.forward[0] / c.y[0] == doctest::Approx(600.0).epsilon(1e-14));
  }
  SUBCASE("rate scaling") {
    const SpatialGraph g(Metric::euclidean(), 1, {0.0, 10.0}, {2.0, 3.0}, {{0, 1}});
    PenaltyParams p;
    p.beta = 2;
    const auto c = assign_costs(g, p, 1);
    CHECK(c.forward[0] == c.y[0] / 2);
  }
  SUBCASE("degree base and asymmetric exponents") {
    const SpatialGraph g(Metric::euclidean(), 1, {0.0, 1.0, 2.0}, {}, {{0, 1}, {1, 2}});
    PenaltyParams p;
    p.base = PenaltyBase::Degree;
    p.mu = 1;
    p.nu = 2;
    const auto c = assign_costs(g, p, 1);
    REQUIRE_FALSE(c.symmetric());
    CHECK(c.forward[0] == doctest::Approx(c.y[0] * 1 * 4));
    CHECK(c.backward[0] == doctest::Approx(c.y[0] * 2 * 1));
  }
  SUBCASE("missing weights") {
    const SpatialGraph g(Metric::euclidean(), 1, {0.0, 1.0}, {}, {{0, 1}});
    CHECK_THROWS_AS(assign_costs(g, PenaltyParams{}, 1), ValidationError);
  }
  SUBCASE("unit-mean draws") {
    girg::GirgParams gp;
    gp.n = 3000;
    const auto g = girg::sample_girg(gp);
    const auto c = assign_costs(g, PenaltyParams{}, 9);
    double s = 0;
    for (double y : c.y) s += y;
    const double m = static_cast<double>(c.y.size());
    CHECK(std::abs(s / m - 1.0) < 4.0 / std::sqrt(m));
  }
}

TEST_CASE("small shortest paths") {
  const auto g2 = path_graph(2);
  auto r = spread_from(g2, fixed_costs({3.2}), 0);
  CHECK(r.times == std::vector<double>{0.0, 3.2});
  const auto g3 = path_graph(3);
  r = spread_from(g3, fixed_costs({1, 2}), 0);
  CHECK(r.times == std::vector<double>{0.0, 1.0, 3.0});
  CHECK(*infection_path(r, 2) == std::vector<NodeId>{0, 1, 2});
  CHECK(*infection_path(r, 0) == std::vector<NodeId>{0});
  CHECK_THROWS_AS(spread_from(g3, fixed_costs({1, 2}), 5), ValidationError);
}

TEST_CASE("dijkstra equals exhaustive path minimum") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + gen() % 7;
    const auto g = random_connected_graph(gen, n, true);
    PenaltyParams p;
    p.mu = (gen() % 3) * 0.5;
    p.zeta = (gen() % 3) * 0.7;
    if (t % 2) p.nu = (gen() % 3) * 0.5;
    const auto costs = assign_costs(g, p, gen());
    const NodeId s = static_cast<NodeId>(gen() % n);
    const auto r = spread_from(g, costs, s);
    const auto oracle = brute_force_times(g, costs, s);
    for (NodeId v = 0; v < n; ++v) CHECK(r.times[v] == doctest::Approx(oracle[v]).epsilon(1e-12));
    CHECK(r.reached() == n);
  }
}

TEST_CASE("unreachable nodes stay at infinity") {
  const SpatialGraph g(Metric::euclidean(), 1, {0.0, 1.0, 5.0}, {}, {{0, 1}});
  const auto r = spread_from(g, fixed_costs({1.0}), 0);
  CHECK(std::isinf(r.times[2]));
  CHECK(r.order[2] == kUnreached);
  CHECK_FALSE(infection_path(r, 2).has_value());
  CHECK(r.reached() == 2);
}

TEST_CASE("rate scaling halves times exactly") {
  std::mt19937_64 gen(4);
  girg::GirgParams gp;
  gp.n = 2000;
  gp.seed = 5;
  const auto g = girg::sample_girg(gp);
  PenaltyParams p;
  p.mu = 1;
  p.zeta = 1.5;
  const auto a = spread_from(g, assign_costs(g, p, 12), 0);
  p.beta = 2.0;
  const auto b = spread_from(g, assign_costs(g, p, 12), 0);
  CHECK(a.sequence == b.sequence);
  CHECK(a.predecessor == b.predecessor);
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (std::isfinite(a.times[v])) CHECK(b.times[v] == a.times[v] / 2);
}

TEST_CASE("larger exponents never speed up infection when lengths are at least one") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> coords(40);
    for (auto& x : coords) x = std::uniform_real_distribution<double>(0, 100)(gen);
    std::vector<double> w(20);
    for (auto& x : w) x = 1.0 + std::exponential_distribution<double>(1.0)(gen);
    std::set<std::pair<NodeId, NodeId>> es;
    for (NodeId v = 1; v < 20; ++v) es.insert({static_cast<NodeId>(gen() % v), v});
    const SpatialGraph g(Metric::euclidean(), 2, coords, w, {es.begin(), es.end()});
    PenaltyParams lo, hi;
    lo.mu = 0.5;
    lo.zeta = 1.0;
    hi = lo;
    if (t % 2) hi.zeta = 2.0; else hi.mu = 1.5;
    const auto a = spread_from(g, assign_costs(g, lo, t), 0);
    const auto b = spread_from(g, assign_costs(g, hi, t), 0);
    for (NodeId v = 0; v < 20; ++v) CHECK(b.times[v] >= a.times[v]);
  }
}

TEST_CASE("deterministic for a fixed seed") {
  girg::GirgParams gp;
  gp.n = 1500;
  const auto g = girg::sample_girg(gp);
  PenaltyParams p;
  p.mu = 1;
  const auto a = run_epidemics(g, p, 0, 3, 77, 1);
  const auto b = run_epidemics(g, p, 0, 3, 77, 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(a[r].times == b[r].times);
    CHECK(a[r].seed == mix_seed(77, r));
  }
}

TEST_CASE("infection order, path sums and curve monotonicity") {
  girg::GirgParams gp;
  gp.n = 2000;
  gp.seed = 2;
  const auto g = girg::sample_girg(gp);
  PenaltyParams p;
  p.mu = 0.5;
  p.zeta = 1;
  const auto costs = assign_costs(g, p, 3);
  const auto r = spread_from(g, costs, 0);
  for (std::size_t i = 1; i < r.sequence.size(); ++i) {
    const double a = r.times[r.sequence[i - 1]], b = r.times[r.sequence[i]];
    CHECK((a < b || (a == b && r.sequence[i - 1] < r.sequence[i])));
  }
  for (NodeId v : r.sequence) {
    const auto path = *infection_path(r, v);
    double sum = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
      const NodeId a = path[k - 1], b = path[k];
      for (const auto& arc : g.neighbors(a))
        if (arc.to == b) sum += costs.cost(arc.edge, g.edge(arc.edge).u == a);
    }
    CHECK(sum == doctest::Approx(r.times[v]).epsilon(1e-12));
  }
  CHECK(infected_by(r, 0.0) >= 1);
  std::size_t prev = 0;
  for (double t = 0; t < 20; t += 0.25) {
    const std::size_t now = infected_by(r, t);
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("truncated spreading") {
  girg::GirgParams gp;
  gp.n = 2000;
  const auto g = girg::sample_girg(gp);
  const auto costs = assign_costs(g, PenaltyParams{}, 1);
  const auto full = spread_from(g, costs, 0);
  const auto part = spread_from(g, costs, 0, {100});
  REQUIRE(part.reached() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(part.sequence[i] == full.sequence[i]);
}

TEST_CASE("curve sampling grid") {
  const auto small = curve_sample_counts(10);
  CHECK(small == std::vector<std::uint64_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const auto c100 = curve_sample_counts(100);
  for (std::uint64_t k = 64; k <= 100; k += 4)
    CHECK(std::find(c100.begin(), c100.end(), k) != c100.end());
  CHECK(c100.back() == 100);
  for (std::uint64_t total : {31ULL, 32ULL, 33ULL, 1000ULL, 98765ULL}) {
    const auto c = curve_sample_counts(total);
    std::vector<std::uint64_t> oracle;
    for (std::uint64_t k = 1; k <= total; ++k)
      if (sampled_by_bits(k) || k == total) oracle.push_back(k);
    CHECK(c == oracle);
  }
}

TEST_CASE("curves and quantiles") {
  EpidemicCurve a{{1, 2, 3}, {0.0, 1.0, 2.0}, 3};
  EpidemicCurve b{{1, 2, 3}, {0.0, 3.0, 6.0}, 3};
  auto q = curve_quantiles({a});
  CHECK(q.values[0] == a.times);
  CHECK(q.values[1] == a.times);
  q = curve_quantiles({a, b}, {0.5});
  CHECK(q.values[0] == std::vector<double>{0.0, 2.0, 4.0});
  EpidemicCurve bad{{1, 2}, {0.0, 1.0}, 2};
  CHECK_THROWS_AS(curve_quantiles({a, bad}), ValidationError);
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));

  CHECK(saturation_time(b, 1.0) == 6.0);
  CHECK(saturation_time(b, 0.2) == 0.0);
  CHECK(saturation_time(b, 0.5) == 3.0);
}

TEST_CASE("heatmap grid") {
  SUBCASE("single node") {
    const SpatialGraph g(Metric::euclidean(), 2, {0.0, 0.0}, {}, {});
    const auto r = spread_from(g, fixed_costs({}), 0);
    const auto h = heatmap_grid(r, g, 1);
    CHECK(h.at(0, 0) == 0.0);
  }
  SUBCASE("two boxes") {
    const SpatialGraph g(Metric::euclidean(), 2, {0.0, 0.0, 10.0, 0.0}, {}, {{0, 1}});
    const auto r = spread_from(g, fixed_costs({1.0}), 0);
    const auto h = heatmap_grid(r, g, 2);
    CHECK(h.at(0, 0) == 0.0);
    CHECK(h.at(1, 0) == 1.0);
    CHECK(std::isnan(h.at(0, 1)));
    CHECK_THROWS_AS(heatmap_grid(r, g, 2, BoundingBox{0, 0, 0, 5}), ValidationError);
  }
  SUBCASE("torus recentres on the source") {
    const SpatialGraph g(Metric::torus(2, 10.0), 2, {9.5, 9.5, 0.5, 0.5}, {}, {{0, 1}});
    const auto r = spread_from(g, fixed_costs({1.0}), 0);
    const auto p0 = heatmap_position(r, g, 0);
    const auto p1 = heatmap_position(r, g, 1);
    CHECK(p0[0] == doctest::Approx(5.0));
    CHECK(p1[0] == doctest::Approx(6.0));
    CHECK(p1[1] == doctest::Approx(6.0));
  }
}
