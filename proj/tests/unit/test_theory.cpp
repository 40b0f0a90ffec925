#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "spreadlab/error.hpp"
#include "spreadlab/theory.hpp"

using namespace spreadlab;
using namespace spreadlab::theory;

namespace {

ModelPoint gowalla(double mu, double zeta) {
  ModelPoint m;
  m.d = 2;
  m.tau = 2.78;
  m.alpha = 1.2;
  m.mu = mu;
  m.zeta = zeta;
  return m;
}

// Expected undirected edges per node with length in [l1, l2] on the infinite
// torus: (c/2) Surf(d) * int r^(d-1) E[min(1, Z/r^d)^alpha] dr, Z = W1 W2,
// by plain trapezoid quadrature in log coordinates.
double exact_edge_count(double l1, double l2, int d, double tau, double alpha, double c) {
  auto lambda_e = [&](double r) {
    const double rd = std::pow(r, d);
    const int n = 4000;
    const double umax = std::log(rd) + 60.0 / (tau - 1.0);
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double u = umax * i / n;  // z = e^u
      const double z = std::exp(u);
      const double dens = (tau - 1) * (tau - 1) * u * std::pow(z, -tau) * z;
      const double f = std::pow(std::min(1.0, z / rd), alpha) * dens;
      sum += (i == 0 || i == n ? 0.5 : 1.0) * f;
    }
    return sum * umax / n;
  };
  const int n = 400;
  const double a = std::log(l1), b = std::log(l2);
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = std::exp(a + (b - a) * i / n);
    sum += (i == 0 || i == n ? 0.5 : 1.0) * std::pow(r, d) * lambda_e(r);
  }
  const double surf = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  return 0.5 * c * surf * sum * (b - a) / n;
}

ModelPoint random_point(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> tau(2.05, 3.95), alpha(1.05, 4.0), mu(0.0, 1.5),
      zeta(0.0, 4.0);
  ModelPoint m;
  m.d = 1 + static_cast<int>(gen() % 3);
  m.tau = tau(gen);
  m.alpha = alpha(gen);
  m.mu = mu(gen);
  m.zeta = zeta(gen);
  return m;
}

}  // namespace

TEST_CASE("reference point phases") {
  auto a = classify(gowalla(0, 0));
  CHECK(a.phase == Phase::Explosive);
  CHECK(a.region == Region::A);
  auto b = classify(gowalla(1, 1));
  CHECK(b.phase == Phase::QuasiExponential);
  CHECK(b.region == Region::B);
  auto d = classify(gowalla(1, 2));
  CHECK(d.phase == Phase::Polynomial);
  CHECK(d.region == Region::D);
  // 1 / (2 - 2 * (2 - 1.2)) in double arithmetic; 1.2 is not representable.
  CHECK(std::abs(*d.psi - 2.5) <= 4 * std::numeric_limits<double>::epsilon() * 2.5);
  auto g = classify(gowalla(1, 3));
  CHECK(g.phase == Phase::Geometric);
  CHECK(g.region == Region::G);
  CHECK(*g.psi == 1.0);
  for (auto r : {a, b, d, g}) CHECK_FALSE(r.boundary);
}

TEST_CASE("phi values") {
  const auto b = compute_phi(gowalla(1, 1));
  CHECK(b.region == Region::B);
  CHECK(b.phi == doctest::Approx(1.0 - std::log2(1.7)));
  CHECK(b.phi == doctest::Approx(0.23447).epsilon(1e-4));
  CHECK(b.delta == doctest::Approx(4.265).epsilon(1e-3));

  ModelPoint c;
  c.d = 2;
  c.tau = 2.2;
  c.alpha = 2.5;
  c.mu = 0.05;
  c.zeta = 0.05;
  // mu + zeta/d = 0.075 lies below (3 - tau)/2 = 0.4: explosive, no phi.
  CHECK(classify(c).phase == Phase::Explosive);
  c.mu = 0.3;
  c.zeta = 0.4;
  const auto rc = compute_phi(c);
  CHECK(rc.region == Region::C);
  CHECK(rc.phi == doctest::Approx(1.0 - std::log2(1.2 + 0.3 + 0.2)));
  CHECK(classify(c).upper_bound_only);

  ModelPoint lim;
  lim.d = 2;
  lim.tau = 3.5;
  lim.alpha = 1.0 + 1e-7;
  CHECK(compute_phi(lim).phi == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(compute_phi(gowalla(1, 2)), StateError);
  CHECK_THROWS_AS(compute_psi(gowalla(1, 1)), StateError);
}

TEST_CASE("psi values") {
  const auto d = compute_psi(gowalla(1, 2));
  CHECK(d.region == Region::D);
  CHECK(d.psi == doctest::Approx(2.5));
  CHECK(d.eta_star == doctest::Approx(0.4));
  const Etas e = compute_etas(gowalla(1, 2));
  CHECK(*e.eta3 == doctest::Approx(3.56));
  const auto g = compute_psi(gowalla(1, 3));
  CHECK(g.psi == 1.0);
  CHECK(g.region == Region::G);

  ModelPoint m;  // eta3 -> 0+ as zeta -> d(3 - tau)+ with mu = 0
  m.d = 2;
  m.tau = 2.6;
  m.alpha = 3.0;
  m.zeta = 2 * 0.4 + 1e-6;
  const auto f = compute_psi(m);
  CHECK(f.region == Region::F);
  CHECK(f.psi > 1e5);
}

TEST_CASE("s star") {
  ModelPoint m;
  m.d = 2;
  m.tau = 3.5;
  m.alpha = 2.5;
  m.mu = 0.1;
  m.zeta = 0.2;
  CHECK(std::isinf(*compute_s_star(m).value));
  CHECK(*compute_s_star(gowalla(1, 2)).value == doctest::Approx(0.4));
  const auto undefined = compute_s_star(gowalla(1, 1));
  CHECK_FALSE(undefined.value.has_value());
  CHECK_FALSE(undefined.reason.empty());
}

TEST_CASE("eta star equals min(s star, 1) away from tau = 3 and alpha = 2") {
  std::mt19937_64 gen(1);
  int checked = 0;
  while (checked < 1000) {
    ModelPoint m = random_point(gen);
    const auto s = compute_s_star(m);
    if (!s.value) continue;
    CHECK(compute_eta_star(m) == std::min(*s.value, 1.0));
    ++checked;
  }
}

TEST_CASE("classification invariants") {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 5000; ++i) {
    const ModelPoint m = random_point(gen);
    const auto r = classify(m);
    switch (r.phase) {
      case Phase::Explosive:
        CHECK(r.region == Region::A);
        break;
      case Phase::QuasiExponential:
        CHECK((r.region == Region::B || r.region == Region::C));
        CHECK(*r.phi > 0.0);
        CHECK(*r.phi <= 1.0);
        break;
      case Phase::Polynomial:
        CHECK((r.region == Region::D || r.region == Region::E || r.region == Region::F));
        CHECK(*r.psi > 1.0);
        CHECK(*r.eta_star == doctest::Approx(1.0 / *r.psi));
        break;
      case Phase::Geometric:
        CHECK(r.region == Region::G);
        CHECK(*r.psi == 1.0);
        CHECK(*r.eta_star == 1.0);
        break;
    }
  }
}

TEST_CASE("boundaries") {
  // mu + zeta/d == (3 - tau)/2 exactly: not explosive, flagged.
  ModelPoint m = gowalla(0.11, 0.0);
  m.tau = 2.78;
  const auto r = classify(m, 1e-9);
  CHECK(r.phase != Phase::Explosive);
  CHECK(r.boundary);
  ModelPoint t = gowalla(0, 0);
  t.alpha = std::numeric_limits<double>::infinity();
  t.mu = 0.3;
  const auto ti = classify(t);
  CHECK(ti.phase == Phase::Polynomial);
  CHECK(ti.region == Region::F);
  ModelPoint nu = gowalla(1, 1);
  nu.nu = 2.0;
  CHECK_THROWS_AS(classify(nu), ValidationError);
}

TEST_CASE("lambda values") {
  ModelPoint m = gowalla(0, 0);
  CHECK(lambda_value(0, (m.tau - 1) / 2, 1.0, m) == doctest::Approx(0.0).epsilon(1e-15));
  m = gowalla(1, 1);
  CHECK(lambda_value(0, 0.86, 0, m) == doctest::Approx(0.04));
  CHECK(lambda_value(0.3, 0.7, 0, m) == doctest::Approx(2 * 2 * 0.7 - 1.2 * 2 + std::min(0.3 - 1, 0.0)));
}

TEST_CASE("lambda search on the reference points") {
  const auto q = lambda_search(gowalla(1, 1));
  CHECK(q.feasible_at_zero);
  CHECK(*q.gamma_inf == doctest::Approx(0.85).epsilon(1e-6));
  CHECK(*q.delta_from_gamma == doctest::Approx(compute_phi(gowalla(1, 1)).delta).epsilon(0.01));
  const auto p = lambda_search(gowalla(1, 2));
  CHECK_FALSE(p.feasible_at_zero);
  CHECK(std::abs(p.s_min - 0.4) <= 2e-3);
  CHECK(lambda_value(p.s_min + 1e-9, p.gamma_opt, p.x_opt, gowalla(1, 2)) > 0.0);
  const auto g = lambda_search(gowalla(1, 3));
  CHECK(g.s_min >= 1.0);
}

TEST_CASE("lambda search agrees with closed forms on random points") {
  std::mt19937_64 gen(3);
  int poly = 0, quasi = 0;
  while (poly < 100 || quasi < 100) {
    const ModelPoint m = random_point(gen);
    const auto r = classify(m);
    if (r.boundary) continue;
    if (r.phase == Phase::Polynomial && poly < 100) {
      const auto s = lambda_search(m);
      INFO("tau=" << m.tau << " alpha=" << m.alpha << " mu=" << m.mu << " zeta=" << m.zeta
                  << " d=" << m.d);
      CHECK(std::abs(s.s_min - *r.eta_star) <= 2e-3 + 1e-12);
      CHECK_FALSE(s.feasible_at_zero);
      ++poly;
    } else if (r.phase == Phase::QuasiExponential && quasi < 100) {
      const auto s = lambda_search(m);
      CHECK(s.feasible_at_zero);
      CHECK(*s.delta_from_gamma == doctest::Approx(*r.delta).epsilon(0.01));
      ++quasi;
    } else if (r.phase == Phase::Geometric) {
      CHECK_FALSE(lambda_search(m).feasible_at_zero);
    }
  }
}

TEST_CASE("edge tail constants") {
  EdgeTailParams p;
  p.d = 2;
  p.tau = 3.7;
  p.alpha = 1.2;
  const auto r = edge_tail_theory(20, 100, p);
  CHECK(r.regime == TailRegime::AlphaLess);
  CHECK(*r.c1 == doctest::Approx(2 * std::numbers::pi * 8.1).epsilon(1e-12));
  CHECK(*r.c1 == doctest::Approx(50.894).epsilon(1e-4));
  CHECK(edge_tail_theory(20, 20, p).predicted == 0.0);
  CHECK_THROWS_AS(edge_tail_theory(30, 20, p), ValidationError);
  p.alpha = 1.0;
  CHECK_THROWS_AS(edge_tail_theory(20, 30, p), ValidationError);
  p.alpha = 3.0;
  p.tau = 4.0;
  CHECK(edge_tail_theory(20, 30, p).regime == TailRegime::AlphaEqual);
  p.tau = 2.5;
  CHECK(edge_tail_theory(20, 30, p).regime == TailRegime::AlphaGreater);
}

TEST_CASE("edge tail prediction is decreasing in L1") {
  for (double tau : {2.5, 3.0, 3.7})
    for (double alpha : {1.2, 2.0, 3.5}) {
      EdgeTailParams p;
      p.tau = tau;
      p.alpha = alpha;
      double prev = INFINITY;
      for (double l1 = 20; l1 < 100; l1 += 5) {
        const double v = edge_tail_theory(l1, 100, p).predicted;
        CHECK(v >= 0.0);
        CHECK(v < prev);
        prev = v;
      }
    }
}

TEST_CASE("capped edge tail is a pure power law") {
  EdgeTailParams p;
  p.tau = 2.78;
  p.alpha = 1.2;
  p.weight_cap = 50.0;
  const double big = INFINITY;
  for (double l : {20.0, 40.0, 80.0}) {
    const double a = *edge_tail_theory(l, big, p).predicted_capped;
    const double b = *edge_tail_theory(2 * l, big, p).predicted_capped;
    CHECK(std::log(a / b) == doctest::Approx(2 * 0.2 * std::log(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("edge tail asymptotics against the exact integral") {
  EdgeTailParams p;
  p.tau = 2.78;
  p.alpha = 1.2;
  const double exact = exact_edge_count(20, 100, 2, 2.78, 1.2, 1.0);
  const double pred = edge_tail_theory(20, 100, p).predicted_undirected;
  CHECK(std::abs(pred / exact - 1.0) < 0.1);
}

TEST_CASE("phase diagrams") {
  ModelPoint base = gowalla(0, 0);
  const auto cells = phase_diagram_grid(base, {"zeta", 0.0, 3.1, 200}, {"mu", 0.0, 0.5, 100});
  std::set<char> seen;
  for (const auto& c : cells) seen.insert(region_letter(c.report.region));
  CHECK(seen == std::set<char>{'A', 'B', 'D', 'G'});

  ModelPoint d4;
  d4.d = 4;
  d4.mu = 0.3;
  d4.zeta = 0.4;
  const auto at = phase_diagram_grid(d4, {"alpha", 1.01, 4.0, 300}, {"tau", 2.01, 4.0, 300});
  seen.clear();
  for (const auto& c : at) seen.insert(region_letter(c.report.region));
  CHECK(seen == std::set<char>{'A', 'B', 'C', 'D', 'E', 'F', 'G'});

  // Cells on mu + zeta/2 = 0.11 carry the boundary flag.
  const auto line = phase_diagram_grid(base, {"zeta", 0.0, 0.22, 3}, {"mu", 0.0, 0.11, 2});
  CHECK(line[2].report.boundary);  // zeta = 0.22, mu = 0
  CHECK(line[3].report.boundary);  // zeta = 0, mu = 0.11
}
