#include "spreadlab/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "spreadlab/error.hpp"

namespace spreadlab::theory {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strict comparisons that treat |a - b| <= tol as equality, record it, and
// answer false (so equality never enables the faster phase).
struct Comparator {
  double tol;
  bool* boundary;

  bool less(double a, double b) const {
    if (std::isinf(a) || std::isinf(b)) return a < b;
    if (std::abs(a - b) <= tol) {
      *boundary = true;
      return false;
    }
    return a < b;
  }
  bool greater(double a, double b) const { return less(b, a); }
};

}  // namespace

void ModelPoint::validate() const {
  if (d < 1) throw ValidationError("d must be at least 1");
  if (!(tau > 2.0) || !std::isfinite(tau)) throw ValidationError("tau must be finite and exceed 2");
  if (!(alpha > 1.0)) throw ValidationError("alpha must exceed 1");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be finite and >= 0");
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw ValidationError("zeta must be finite and >= 0");
  if (nu && *nu != mu)
    throw ValidationError("unsupported parameter: the classification covers nu == mu only");
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::Explosive: return "explosive";
    case Phase::QuasiExponential: return "quasi-exponential";
    case Phase::Polynomial: return "polynomial";
    case Phase::Geometric: return "geometric";
  }
  return "?";
}

char region_letter(Region r) { return static_cast<char>('A' + static_cast<int>(r)); }

Etas compute_etas(const ModelPoint& m) {
  Etas e;
  const double d = m.d;
  if (std::isfinite(m.alpha)) {
    e.eta1 = m.zeta - d * (2.0 - m.alpha);
    e.eta2 = m.zeta + m.mu * d * (m.alpha - 2.0) / (m.alpha - m.tau + 1.0);
  }
  e.eta3 = m.zeta + m.mu * d - d * (3.0 - m.tau);
  return e;
}

double compute_eta_star(const ModelPoint& m) {
  const Etas e = compute_etas(m);
  const double d = m.d;
  double best = 1.0;
  if (e.eta1 && m.alpha < 2.0 && m.zeta / d <= 2.0 - m.alpha + 1.0 / d) best = std::min(best, *e.eta1);
  if (e.eta2 && m.alpha > 2.0 && m.tau < 3.0 &&
      m.mu <= (1.0 - m.zeta) * (1.0 / d + (3.0 - m.tau) / (d * (m.alpha - 2.0))))
    best = std::min(best, *e.eta2);
  if (m.tau < 3.0 && m.s() <= 3.0 - m.tau + 1.0 / d) best = std::min(best, *e.eta3);
  return best;
}

namespace {

double s_star_value(const ModelPoint& m) {
  const Etas e = compute_etas(m);
  double best = kInf;
  if (e.eta1 && m.alpha <= 2.0) best = std::min(best, *e.eta1);
  if (e.eta2 && m.alpha > 2.0 && m.tau <= 3.0) best = std::min(best, *e.eta2);
  if (m.tau <= 3.0) best = std::min(best, *e.eta3);
  return best;
}

}  // namespace

SStar compute_s_star(const ModelPoint& m) {
  m.validate();
  SStar out;
  if (!(m.zeta / m.d > 2.0 - m.alpha)) {
    out.reason = "requires zeta/d > 2 - alpha";
    return out;
  }
  if (!(m.s() > 3.0 - m.tau)) {
    out.reason = "requires mu + zeta/d > 3 - tau";
    return out;
  }
  out.value = s_star_value(m);
  return out;
}

PhaseReport classify(const ModelPoint& m, double tol) {
  m.validate();
  PhaseReport r;
  const Comparator cmp{tol, &r.boundary};
  const double d = m.d;
  const double s = m.s();
  const double zd = m.zeta / d;

  if (cmp.less(s, (3.0 - m.tau) / 2.0)) {
    r.phase = Phase::Explosive;
    r.region = Region::A;
    return r;
  }

  const bool weak = cmp.less(zd, 2.0 - m.alpha);
  const bool hub = cmp.less(s, 3.0 - m.tau);
  if (weak || hub) {
    r.phase = Phase::QuasiExponential;
    const double phi1 = weak ? 1.0 - std::log2(m.alpha + zd) : -kInf;
    const double phi2 = hub ? 1.0 - std::log2(m.tau - 1.0 + s) : -kInf;
    if (weak && hub && std::abs(phi1 - phi2) <= tol) r.boundary = true;
    if (phi1 >= phi2 || (hub && weak && std::abs(phi1 - phi2) <= tol)) {
      r.region = Region::B;
      r.phi = phi1;
    } else {
      r.region = Region::C;
      r.phi = phi2;
      r.upper_bound_only = true;
    }
    r.delta = 1.0 / *r.phi;
    return r;
  }

  r.eta_star = compute_eta_star(m);
  r.s_star = s_star_value(m);
  const Etas e = compute_etas(m);
  const bool cond_a = cmp.less(m.alpha, 2.0) && cmp.less(zd, 2.0 - m.alpha + 1.0 / d);
  const bool cond_b = std::isfinite(m.alpha) && cmp.greater(m.alpha, 2.0) && cmp.less(m.tau, 3.0) &&
                      cmp.less(m.mu, (1.0 - m.zeta) * (1.0 / d + (3.0 - m.tau) / (d * (m.alpha - 2.0))));
  const bool cond_c = cmp.less(m.tau, 3.0) && cmp.less(s, 3.0 - m.tau + 1.0 / d);
  if (!(cond_a || cond_b || cond_c)) {
    r.phase = Phase::Geometric;
    r.region = Region::G;
    r.psi = 1.0;
    return r;
  }

  r.phase = Phase::Polynomial;
  const std::array<std::pair<bool, double>, 3> cand{{{cond_a, cond_a ? *e.eta1 : kInf},
                                                     {cond_b, cond_b ? *e.eta2 : kInf},
                                                     {cond_c, *e.eta3}}};
  int best = -1;
  for (int k = 0; k < 3; ++k) {
    if (!cand[k].first) continue;
    if (best < 0 || cand[k].second < cand[best].second - tol) {
      best = k;
    } else if (std::abs(cand[k].second - cand[best].second) <= tol) {
      r.boundary = true;
    }
  }
  r.region = static_cast<Region>(static_cast<int>(Region::D) + best);
  r.psi = 1.0 / cand[best].second;
  return r;
}

PhiResult compute_phi(const ModelPoint& m, double tol) {
  const PhaseReport r = classify(m, tol);
  if (r.phase != Phase::QuasiExponential)
    throw StateError("phi is defined in the quasi-exponential phase only (point is " +
                     phase_name(r.phase) + ")");
  return {*r.phi, r.region, *r.delta};
}

PsiResult compute_psi(const ModelPoint& m, double tol) {
  const PhaseReport r = classify(m, tol);
  if (r.phase == Phase::Explosive || r.phase == Phase::QuasiExponential)
    throw StateError("psi is defined in the polynomial and geometric phases only (point is " +
                     phase_name(r.phase) + ")");
  return {*r.psi, r.region, *r.eta_star};
}

double lambda_value(double s, double gamma, double x, const ModelPoint& m) {
  const double d = m.d;
  const double t1 = 2.0 * (1.0 - x) * d * gamma;
  const double u = 2.0 * x * gamma / (m.tau - 1.0) - 1.0;
  const double t2 = std::isinf(m.alpha) ? (u >= 0.0 ? 0.0 : -kInf) : std::min(m.alpha * d * u, 0.0);
  const double t3 = std::min(s - m.zeta - 2.0 * x * m.mu * d * gamma / (m.tau - 1.0), 0.0);
  return t1 + t2 + t3;
}

std::pair<double, double> lambda_max_over_x(double s, double gamma, const ModelPoint& m,
                                            int x_grid) {
  double best = -kInf, arg = 0.0;
  auto consider = [&](double x) {
    if (!(x >= 0.0 && x <= 1.0)) return;
    const double v = lambda_value(s, gamma, x, m);
    if (v > best || (v == best && x < arg)) {
      best = v;
      arg = x;
    }
  };
  consider(0.0);
  consider(1.0);
  consider((m.tau - 1.0) / (2.0 * gamma));
  if (m.mu > 0.0) consider((s - m.zeta) * (m.tau - 1.0) / (2.0 * m.mu * m.d * gamma));
  for (int i = 1; i < x_grid; ++i) consider(static_cast<double>(i) / x_grid);
  return {best, arg};
}

namespace {

// Largest gamma probed; the maximum over x does not decrease in gamma.
constexpr double kGammaTop = 1.0 - 1e-12;

bool feasible(double s, const ModelPoint& m, int x_grid) {
  return lambda_max_over_x(s, kGammaTop, m, x_grid).first > 0.0;
}

// Smallest gamma in (0, kGammaTop] with a positive maximum, by bisection.
double gamma_infimum(double s, const ModelPoint& m, int x_grid) {
  double lo = 0.0, hi = kGammaTop;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lambda_max_over_x(s, mid, m, x_grid).first > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

LambdaSearchResult lambda_search(const ModelPoint& m, const LambdaSearchOptions& opts) {
  m.validate();
  if (!(opts.s_step > 0.0) || opts.x_grid < 1)
    throw ValidationError("lambda_search: s_step must be positive and x_grid >= 1");
  LambdaSearchResult r;
  const int xg = opts.x_grid;
  r.feasible_at_zero = feasible(0.0, m, xg);
  if (r.feasible_at_zero) {
    r.s_min = 0.0;
    r.gamma_inf = gamma_infimum(0.0, m, xg);
    r.delta_from_gamma = 1.0 / std::log2(1.0 / *r.gamma_inf);
  } else {
    // Beyond s_max the last term of Lambda vanishes for every x, so
    // feasibility there is feasibility for all larger s.
    const double s_max = m.zeta + 2.0 * m.mu * m.d / (m.tau - 1.0) + opts.s_step;
    auto hi = static_cast<long long>(std::ceil(s_max / opts.s_step));
    if (!feasible(static_cast<double>(hi) * opts.s_step, m, xg)) {
      r.s_min = kInf;
      return r;
    }
    long long lo = 0;
    while (hi - lo > 1) {
      const long long mid = lo + (hi - lo) / 2;
      if (feasible(static_cast<double>(mid) * opts.s_step, m, xg))
        hi = mid;
      else
        lo = mid;
    }
    r.s_min = static_cast<double>(hi) * opts.s_step;
  }
  r.gamma_opt = gamma_infimum(r.s_min, m, xg);
  r.x_opt = lambda_max_over_x(r.s_min, r.gamma_opt, m, xg).second;
  return r;
}

std::string regime_name(TailRegime r) {
  switch (r) {
    case TailRegime::AlphaLess: return "alpha<tau-1";
    case TailRegime::AlphaEqual: return "alpha=tau-1";
    case TailRegime::AlphaGreater: return "alpha>tau-1";
  }
  return "?";
}

double unit_sphere_surface(int d) {
  return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
}

EdgeTailPrediction edge_tail_theory(double l1, double l2, const EdgeTailParams& p, double tol) {
  if (p.d < 1) throw ValidationError("edge_tail_theory: d must be at least 1");
  if (!(p.alpha > 1.0) || std::isinf(p.alpha))
    throw ValidationError("edge_tail_theory: alpha must be finite and exceed 1");
  if (!(p.tau > 2.0)) throw ValidationError("edge_tail_theory: tau must exceed 2");
  if (!(p.c > 0.0 && p.c <= 1.0)) throw ValidationError("edge_tail_theory: c must lie in (0, 1]");
  if (!(l1 > 0.0) || !(l2 >= l1)) throw ValidationError("edge_tail_theory: need 0 < L1 <= L2");

  const double d = p.d, a = p.alpha, t = p.tau;
  const double surf = unit_sphere_surface(p.d);
  const double gap = a + 1.0 - t;  // alpha - (tau - 1)
  EdgeTailPrediction r;
  if (std::abs(gap) <= tol)
    r.regime = TailRegime::AlphaEqual;
  else
    r.regime = gap < 0 ? TailRegime::AlphaLess : TailRegime::AlphaGreater;

  if (r.regime != TailRegime::AlphaEqual) {
    r.c1 = p.c * surf * (t - 1) * (t - 1) / (gap * gap * d * (a - 1));
    r.c3 = p.c * surf * ((t - 1) + (t - 1) * (t - 1) / gap) / (d * (t - 2));
  }
  r.c2 = p.c * surf * (t - 1) * (t - 1) / (2 * d * (a - 1));

  // L^-k * log(L^d)^j, zero at L = infinity.
  auto term = [&](double l, double k, int j) {
    if (std::isinf(l)) return 0.0;
    return std::pow(l, -k) * std::pow(d * std::log(l), j);
  };
  switch (r.regime) {
    case TailRegime::AlphaLess:
      r.predicted = *r.c1 * (term(l1, d * (a - 1), 0) - term(l2, d * (a - 1), 0));
      break;
    case TailRegime::AlphaEqual:
      r.predicted = *r.c2 * (term(l1, d * (a - 1), 2) - term(l2, d * (a - 1), 2));
      break;
    case TailRegime::AlphaGreater:
      r.predicted = *r.c3 * (term(l1, d * (t - 2), 1) - term(l2, d * (t - 2), 1));
      break;
  }
  r.predicted_undirected = r.predicted / 2.0;
  r.below_floor = l1 < p.l1_floor;

  if (p.weight_cap) {
    const double mcap = *p.weight_cap;
    if (!(mcap >= 1.0)) throw ValidationError("edge_tail_theory: weight cap M must be >= 1");
    double tilde;
    if (r.regime == TailRegime::AlphaEqual)
      tilde = (t - 1) * (t - 1) * std::log(mcap) * std::log(mcap) / 2.0;
    else
      tilde = (t - 1) * (t - 1) / (gap * gap) +
              std::pow(mcap, gap) * (t - 1) * (t - 1) * (std::log(mcap) - 1.0 / gap) / gap;
    r.c4 = p.c * surf * tilde / (d * (a - 1));
    r.predicted_capped = *r.c4 * (term(l1, d * (a - 1), 0) - term(l2, d * (a - 1), 0));
    if (!(l1 > std::pow(mcap, 1.0 / d))) r.below_floor = true;
  }
  return r;
}

void set_parameter(ModelPoint& m, const std::string& name, double value) {
  if (name == "mu")
    m.mu = value;
  else if (name == "zeta")
    m.zeta = value;
  else if (name == "alpha")
    m.alpha = value;
  else if (name == "tau")
    m.tau = value;
  else if (name == "d") {
    if (value != std::floor(value)) throw ValidationError("d must be an integer");
    m.d = static_cast<int>(value);
  } else
    throw ValidationError("unknown parameter '" + name + "' (expected mu, zeta, alpha, tau or d)");
}

std::vector<DiagramCell> phase_diagram_grid(const ModelPoint& base, const Axis& x, const Axis& y,
                                            double tol) {
  if (x.name == y.name) throw ValidationError("phase diagram axes must differ");
  if (x.steps < 1 || y.steps < 1) throw ValidationError("phase diagram axes need >= 1 step");
  std::vector<DiagramCell> out;
  out.reserve(static_cast<std::size_t>(x.steps) * y.steps);
  for (int j = 0; j < y.steps; ++j)
    for (int i = 0; i < x.steps; ++i) {
      ModelPoint m = base;
      set_parameter(m, x.name, x.value(i));
      set_parameter(m, y.name, y.value(j));
      DiagramCell cell{x.value(i), y.value(j), classify(m, tol),
                       std::numeric_limits<double>::quiet_NaN()};
      if (cell.report.phi)
        cell.exponent = *cell.report.phi;
      else if (cell.report.psi)
        cell.exponent = *cell.report.psi;
      out.push_back(cell);
    }
  return out;
}

}  // namespace spreadlab::theory
