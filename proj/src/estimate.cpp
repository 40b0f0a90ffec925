#include "spreadlab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "spreadlab/error.hpp"

namespace spreadlab::estimate {

std::string method_name(FitMethod m) {
  switch (m) {
    case FitMethod::TruncatedTail: return "truncated-tail";
    case FitMethod::LogLog: return "loglog";
    case FitMethod::LogLinear: return "loglinear";
  }
  return "?";
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::Concave: return "concave";
    case Shape::Linear: return "linear";
    case Shape::Convex: return "convex";
  }
  return "?";
}

namespace {

// desc is sorted in decreasing order.
double hill_sorted(const std::vector<double>& desc, std::size_t kappa) {
  const double ref = desc[kappa];
  double sum = 0.0;
  for (std::size_t i = 0; i < kappa; ++i) sum += std::log(desc[i] / ref);
  return sum / static_cast<double>(kappa);
}

std::vector<double> sorted_desc(std::span<const double> sample) {
  std::vector<double> desc(sample.begin(), sample.end());
  for (double x : desc) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("hill: sample values must be positive and finite");
  }
  std::sort(desc.begin(), desc.end(), std::greater<>());
  return desc;
}

double variance(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double hill_estimator(std::span<const double> sample, std::size_t kappa) {
  if (kappa == 0 || kappa + 1 > sample.size()) {
    throw ValidationError("hill: need 1 <= kappa and kappa + 1 <= sample size");
  }
  return hill_sorted(sorted_desc(sample), kappa);
}

KappaChoice select_kappa(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 500) throw ValidationError("select_kappa: need at least 500 values");
  const auto desc = sorted_desc(sample);
  const double nd = static_cast<double>(n);
  const auto lo = static_cast<std::size_t>(std::ceil(std::pow(nd, 0.3)));
  const auto hi = std::min(static_cast<std::size_t>(std::ceil(std::pow(nd, 0.8))), n - 1);

  constexpr std::size_t kGrid = 40;
  constexpr std::size_t kWindow = 7;
  KappaChoice out;
  std::vector<std::size_t> ks;
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(kGrid - 1);
    const auto k = static_cast<std::size_t>(
        std::llround(std::exp(std::log(static_cast<double>(lo)) * (1.0 - t) +
                              std::log(static_cast<double>(hi)) * t)));
    if (ks.empty() || k > ks.back()) ks.push_back(k);
  }
  std::vector<double> gammas;
  for (std::size_t k : ks) {
    gammas.push_back(hill_sorted(desc, k));
    out.sweep.emplace_back(k, gammas.back());
  }

  const auto fallback = static_cast<std::size_t>(std::ceil(std::pow(nd, 2.0 / 3.0)));
  if (ks.size() < kWindow) {
    out.kappa = fallback;
    out.plateau = false;
  } else {
    std::vector<double> var;
    for (std::size_t j = 0; j + kWindow <= gammas.size(); ++j) {
      var.push_back(variance(std::span(gammas).subspan(j, kWindow)));
    }
    const bool up = std::is_sorted(var.begin(), var.end());
    const bool down = std::is_sorted(var.rbegin(), var.rend());
    if ((up || down) && var.front() != var.back()) {
      out.kappa = fallback;
      out.plateau = false;
    } else {
      const auto best = static_cast<std::size_t>(std::min_element(var.begin(), var.end()) - var.begin());
      out.kappa = ks[best + kWindow - 1];
    }
  }
  if (!(hill_sorted(desc, out.kappa) > 0.0)) {
    throw EstimationError("select_kappa: Hill estimate vanishes (ties in the upper tail)");
  }
  return out;
}

HillResult estimate_tail_index(std::span<const double> sample) {
  auto choice = select_kappa(sample);
  HillResult r;
  r.kappa = choice.kappa;
  r.gamma_hat = hill_estimator(sample, choice.kappa);
  r.tau_hat = 1.0 + 1.0 / r.gamma_hat;
  r.kappa_sweep = std::move(choice.sweep);
  r.plateau = choice.plateau;
  return r;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) throw ValidationError("log_grid: need 0 < lo < hi, 2+ points");
  std::vector<double> g(points);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<TailPoint> empirical_truncated_tail(std::span<const double> lengths, double l_minus,
                                                double l_plus, std::span<const double> grid,
                                                std::size_t min_edges) {
  if (!(l_minus >= 0.0) || !(l_plus > l_minus)) throw ValidationError("truncated tail: need 0 <= L- < L+");
  if (grid.size() < 2) throw ValidationError("truncated tail: grid needs two points");
  std::vector<double> window;
  for (double l : lengths) {
    if (l >= l_minus && l <= l_plus) window.push_back(l);
  }
  if (window.size() < min_edges || window.empty()) {
    std::ostringstream msg;
    msg << "truncated tail: " << window.size() << " edges in [" << l_minus << ", " << l_plus
        << "], need " << min_edges;
    throw EstimationError(msg.str());
  }
  std::sort(window.begin(), window.end());
  const double total = static_cast<double>(window.size());
  std::vector<TailPoint> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = grid[i];
    double f;
    if (i == 0) {
      f = 1.0;
    } else if (i + 1 == grid.size()) {
      f = 0.0;
    } else {
      const auto above = window.end() - std::upper_bound(window.begin(), window.end(), l);
      f = static_cast<double>(above) / total;
    }
    out.push_back({l, f});
  }
  return out;
}

std::vector<TailPoint> empirical_truncated_tail(const SpatialGraph& g, double l_minus,
                                                double l_plus, std::size_t grid_points) {
  std::vector<double> lengths;
  lengths.reserve(g.num_edges());
  for (const auto& e : g.edges()) lengths.push_back(e.length);
  const auto grid = log_grid(std::max(l_minus, 1e-300), l_plus, grid_points);
  return empirical_truncated_tail(lengths, l_minus, l_plus, grid);
}

namespace {

struct TailObjective {
  std::vector<double> log_l;
  std::vector<double> log_f;
  double log_lp = 0.0;
  double d = 1.0;

  // Residual sum of squares at a with the optimal log b; also reports log b.
  double sse(double a, double* log_b = nullptr) const {
    const double k = d * (a - 1.0);
    const std::size_t m = log_l.size();
    std::vector<double> r(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      // log(L^-k - Lp^-k) = -k log L + log1p(-exp(-k (log Lp - log L)))
      const double g = -k * log_l[i] + std::log(-std::expm1(-k * (log_lp - log_l[i])));
      r[i] = log_f[i] - g;
      mean += r[i];
    }
    mean /= static_cast<double>(m);
    double s = 0.0;
    for (double x : r) s += (x - mean) * (x - mean);
    if (log_b) *log_b = mean;
    return s;
  }
};

}  // namespace

TailFit fit_alpha(std::span<const TailPoint> tail, double l_plus, std::size_t d) {
  if (d == 0) throw ValidationError("fit_alpha: d must be positive");
  TailObjective obj;
  obj.log_lp = std::log(l_plus);
  obj.d = static_cast<double>(d);
  double lo_l = INFINITY, hi_l = 0.0;
  for (const auto& p : tail) {
    if (p.tail > 0.0 && p.tail < 1.0 && p.length > 0.0 && p.length < l_plus) {
      obj.log_l.push_back(std::log(p.length));
      obj.log_f.push_back(std::log(p.tail));
      lo_l = std::min(lo_l, p.length);
      hi_l = std::max(hi_l, p.length);
    }
  }
  if (obj.log_l.size() < 10) {
    throw EstimationError("fit_alpha: need at least 10 points with 0 < F < 1, got " +
                          std::to_string(obj.log_l.size()));
  }

  constexpr double kLo = 1.0 + 1e-4;
  constexpr double kHi = 6.0;
  constexpr double kStep = 5e-3;
  std::vector<double> trace;
  double best_a = kLo, best = INFINITY;
  for (double a = kLo; a <= kHi; a += kStep) {
    const double s = obj.sse(a);
    trace.push_back(s);
    if (s < best) {
      best = s;
      best_a = a;
    }
  }
  if (best_a - kLo < kStep / 2 || kHi - best_a < kStep) {
    std::ostringstream msg;
    msg << "fit_alpha: minimum on the edge of a in [" << kLo << ", " << kHi << "] at a=" << best_a
        << "; residual trace:";
    for (std::size_t i = 0; i < trace.size(); i += std::max<std::size_t>(1, trace.size() / 10)) {
      msg << ' ' << trace[i];
    }
    throw EstimationError(msg.str());
  }

  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_a - kStep, b = best_a + kStep;
  double c = b - phi * (b - a), e = a + phi * (b - a);
  double fc = obj.sse(c), fe = obj.sse(e);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - phi * (b - a);
      fc = obj.sse(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + phi * (b - a);
      fe = obj.sse(e);
    }
  }

  TailFit fit;
  fit.method = FitMethod::TruncatedTail;
  fit.estimate = 0.5 * (a + b);
  double log_b = 0.0;
  fit.residual_sse = obj.sse(fit.estimate, &log_b);
  fit.scale = std::exp(log_b);
  fit.window = {lo_l, hi_l};
  fit.points_used = obj.log_l.size();
  const double mean_y = std::accumulate(obj.log_f.begin(), obj.log_f.end(), 0.0) /
                        static_cast<double>(obj.log_f.size());
  double tss = 0.0;
  for (double y : obj.log_f) tss += (y - mean_y) * (y - mean_y);
  fit.r2 = tss > 0.0 ? 1.0 - fit.residual_sse / tss : 1.0;
  return fit;
}

namespace {

struct Window {
  std::vector<double> x, y;
};

Window curve_window(const spread::EpidemicCurve& curve, double i_low, double i_high, FitMethod mode) {
  if (!(i_low > 0.0) || !(i_high > i_low)) throw ValidationError("curve window: need 0 < I_low < I_high");
  Window w;
  double t_ref = 0.0;
  for (std::size_t i = 0; i < curve.counts.size(); ++i) {
    const double count = static_cast<double>(curve.counts[i]);
    const double t = curve.times[i];
    if (count < i_low || count > i_high || !(t > 0.0)) continue;
    if (t_ref == 0.0) t_ref = t;
    // t / t_ref is unchanged by an exact rescaling of t.
    w.x.push_back(mode == FitMethod::LogLinear ? t : std::log10(t / t_ref));
    w.y.push_back(std::log10(count));
  }
  return w;
}

}  // namespace

TailFit fit_growth_exponent(const spread::EpidemicCurve& curve, double i_low, double i_high,
                            FitMethod mode) {
  if (mode == FitMethod::TruncatedTail) throw ValidationError("fit_growth_exponent: mode must be loglog or loglinear");
  const auto w = curve_window(curve, i_low, i_high, mode);
  const std::size_t m = w.x.size();
  if (m < 5) {
    throw EstimationError("fit_growth_exponent: " + std::to_string(m) + " samples in window, need 5");
  }
  const double mx = std::accumulate(w.x.begin(), w.x.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(w.y.begin(), w.y.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (w.x[i] - mx) * (w.x[i] - mx);
    sxy += (w.x[i] - mx) * (w.y[i] - my);
    syy += (w.y[i] - my) * (w.y[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("fit_growth_exponent: all window samples share one time");
  TailFit fit;
  fit.method = mode;
  fit.estimate = sxy / sxx;
  fit.scale = my - fit.estimate * mx;
  fit.window = {i_low, i_high};
  fit.points_used = m;
  fit.residual_sse = std::max(0.0, syy - fit.estimate * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - fit.residual_sse / syy : 1.0;
  return fit;
}

double binomial_two_sided(std::size_t k, std::size_t n) {
  if (n == 0) return 1.0;
  const double half = static_cast<double>(n) / 2.0;
  const double dev = std::abs(static_cast<double>(k) - half);
  double p = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    if (std::abs(static_cast<double>(j) - half) + 1e-9 < dev) continue;
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) -
                  static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

ConcavityResult concavity_check(const spread::EpidemicCurve& curve, double i_low, double i_high,
                                FitMethod scale, double level) {
  if (scale == FitMethod::TruncatedTail) throw ValidationError("concavity_check: scale must be loglog or loglinear");
  const auto w = curve_window(curve, i_low, i_high, scale);
  ConcavityResult r;
  r.points_used = w.x.size();
  if (w.x.size() < 10) {
    throw EstimationError("concavity_check: " + std::to_string(w.x.size()) + " samples in window, need 10");
  }
  std::vector<double> slope;
  for (std::size_t i = 0; i + 1 < w.x.size(); ++i) {
    const double dx = w.x[i + 1] - w.x[i];
    if (dx > 0.0) slope.push_back((w.y[i + 1] - w.y[i]) / dx);
  }
  std::vector<double> smooth(slope.size());
  for (std::size_t i = 0; i < slope.size(); ++i) {
    const std::size_t a = i >= 2 ? i - 2 : 0;
    const std::size_t b = std::min(slope.size(), i + 3);
    std::vector<double> win(slope.begin() + static_cast<std::ptrdiff_t>(a),
                            slope.begin() + static_cast<std::ptrdiff_t>(b));
    std::nth_element(win.begin(), win.begin() + static_cast<std::ptrdiff_t>(win.size() / 2), win.end());
    smooth[i] = win[win.size() / 2];
  }
  for (std::size_t i = 0; i + 1 < smooth.size(); ++i) {
    const double diff = smooth[i + 1] - smooth[i];
    if (std::abs(diff) <= 1e-9) {
      ++r.zero;
    } else if (diff > 0.0) {
      ++r.positive;
    } else {
      ++r.negative;
    }
  }
  const std::size_t signed_n = r.positive + r.negative;
  if (signed_n > 0) {
    r.statistic = (static_cast<double>(r.negative) - static_cast<double>(r.positive)) /
                  static_cast<double>(signed_n);
    r.p_value = binomial_two_sided(std::max(r.positive, r.negative), signed_n);
  }
  if (r.p_value < level) r.verdict = r.negative > r.positive ? Shape::Concave : Shape::Convex;
  return r;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("spearman: need two equal-length samples of size >= 2");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw EstimationError("spearman: constant sample");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace spreadlab::estimate
