#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "spreadlab/error.hpp"
#include "spreadlab/girg.hpp"

using namespace spreadlab;
using namespace spreadlab::girg;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / a.size() -
                                   static_cast<double>(j) / b.size()));
  }
  return best;
}

// Critical value at level 0.01.
double ks_critical(std::size_t n, std::size_t m) {
  return 1.628 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

struct Moments {
  double mean, sd;
};

Moments moments(const std::vector<double>& x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (x.size() - 1))};
}

std::vector<double> edge_counts(GirgParams p, int runs, bool naive, std::uint64_t base) {
  std::vector<double> out;
  for (int r = 0; r < runs; ++r) {
    p.seed = base + r;
    out.push_back(static_cast<double>((naive ? sample_girg_naive(p) : sample_girg(p)).num_edges()));
  }
  return out;
}

void check_equivalent(const GirgParams& p, int runs) {
  const auto a = edge_counts(p, runs, true, 1000);
  const auto b = edge_counts(p, runs, false, 5000);
  const Moments ma = moments(a), mb = moments(b);
  INFO("naive mean " << ma.mean << " sampler mean " << mb.mean);
  CHECK(ks_statistic(a, b) < ks_critical(a.size(), b.size()));
  const double se = std::sqrt((ma.sd * ma.sd + mb.sd * mb.sd) / runs);
  CHECK(std::abs(ma.mean - mb.mean) < 3.0 * se + 1e-12);
}

}  // namespace

TEST_CASE("pareto inverse transform") {
  CHECK(pareto_from_uniform(1.0, 2.5) == 1.0);
  CHECK(pareto_from_uniform(0.25, 3.0) == doctest::Approx(2.0));
  Rng rng(11);
  const auto w = sample_weights(1'000'000, 2.78, rng);
  CHECK(*std::min_element(w.begin(), w.end()) >= 1.0);
  const Moments m = moments(w);
  const double target = 1.78 / 0.78;
  CHECK(std::abs(m.mean - target) < 3.0 * m.sd / std::sqrt(static_cast<double>(w.size())));
  CHECK_THROWS_AS(sample_weights(3, 2.0, rng), ValidationError);
}

TEST_CASE("connection probability") {
  CHECK(connection_probability(10, 10, 5, 2, 1.2, 0.7) == 0.7);
  CHECK(connection_probability(1, 1, 10, 2, 1.2, 1.0) ==
        doctest::Approx(std::pow(10.0, -2.4)).epsilon(1e-12));
  CHECK(connection_probability(1, 1, 0.0, 2, 1.2, 0.5) == 0.5);
  CHECK(connection_probability(3, 3, 3.0000001, 2, kThreshold, 1.0) == 0.0);
  CHECK(connection_probability(3, 3, 3.0, 2, kThreshold, 1.0) == 1.0);
}

TEST_CASE("connection probability monotonicity and symmetry") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> w(1.0, 20.0), r(0.01, 50.0), a(1.01, 5.0);
  for (int t = 0; t < 10000; ++t) {
    const double wu = w(gen), wv = w(gen), d1 = r(gen), d2 = r(gen), alpha = a(gen);
    const int d = 1 + t % 3;
    const double p = connection_probability(wu, wv, d1, d, alpha, 0.8);
    CHECK(p >= 0.0);
    CHECK(p <= 0.8);
    CHECK(p == connection_probability(wv, wu, d1, d, alpha, 0.8));
    CHECK(connection_probability(wu, wv, std::max(d1, d2), d, alpha, 0.8) <=
          connection_probability(wu, wv, std::min(d1, d2), d, alpha, 0.8));
    CHECK(connection_probability(wu * 1.5, wv, d1, d, alpha, 0.8) >= p);
  }
}

TEST_CASE("parameter validation") {
  GirgParams p;
  p.tau = 2.0;
  CHECK_THROWS_AS(sample_girg(p), ValidationError);
  p = {};
  p.alpha = 1.0;
  CHECK_THROWS_AS(sample_girg(p), ValidationError);
  p = {};
  p.c = 0.0;
  CHECK_THROWS_AS(sample_girg(p), ValidationError);
  p = {};
  p.n = 20000;
  CHECK_THROWS_AS(sample_girg_naive(p), ValidationError);
  p = {};
  p.n = 1e6;
  p.max_nodes = 1000;
  CHECK_THROWS_AS(sample_girg(p), ValidationError);
}

TEST_CASE("tiny node counts") {
  GirgParams p;
  p.n = 1e-9;
  const auto g = sample_girg(p);
  CHECK(g.num_nodes() == 0);
  CHECK(g.num_edges() == 0);
}

TEST_CASE("same seed gives the same vertices in both samplers") {
  GirgParams p;
  p.n = 300;
  p.seed = 9;
  const auto a = sample_girg(p);
  const auto b = sample_girg_naive(p);
  REQUIRE(a.num_nodes() == b.num_nodes());
  CHECK(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()));
  const double side = p.side();
  for (double x : a.coordinates()) {
    CHECK(x >= 0.0);
    CHECK(x < side);
  }
}

TEST_CASE("deterministic regardless of thread count") {
  GirgParams p;
  p.n = 20000;
  p.tau = 2.5;
  p.alpha = 1.5;
  p.seed = 42;
  const auto a = sample_girg(p, 1);
  const auto b = sample_girg(p, 4);
  REQUIRE(a.num_edges() == b.num_edges());
  for (std::size_t e = 0; e < a.num_edges(); ++e) {
    CHECK(a.edge(e).u == b.edge(e).u);
    CHECK(a.edge(e).v == b.edge(e).v);
  }
}

TEST_CASE("sampler matches naive sampler in distribution") {
  GirgParams p;
  p.n = 500;
  SUBCASE("d=2 heavy tail long range") {
    p.d = 2;
    p.tau = 2.78;
    p.alpha = 1.2;
    check_equivalent(p, 200);
  }
  SUBCASE("d=1") {
    p.d = 1;
    p.tau = 2.3;
    p.alpha = 2.5;
    p.c = 0.6;
    check_equivalent(p, 200);
  }
  SUBCASE("d=3 threshold") {
    p.d = 3;
    p.tau = 3.2;
    p.alpha = kThreshold;
    check_equivalent(p, 200);
  }
  SUBCASE("near-lattice regime") {
    p.n = 2000;
    p.d = 2;
    p.tau = 3.7;
    p.alpha = 6.0;
    check_equivalent(p, 40);
  }
}

TEST_CASE("vanishing density") {
  GirgParams p;
  p.n = 1000;
  p.c = 1e-9;
  const auto g = sample_girg(p);
  // Expected edges are far below 1e-3; P(>= 3 edges) is negligible.
  CHECK(g.num_edges() <= 2);
}

TEST_CASE("stored lengths match the torus metric") {
  GirgParams p;
  p.n = 3000;
  p.seed = 3;
  const auto g = sample_girg(p);
  for (const Edge& e : g.edges()) CHECK(e.length == g.distance(e.u, e.v));
}
