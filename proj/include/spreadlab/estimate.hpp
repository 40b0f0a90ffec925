#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spreadlab/graph.hpp"
#include "spreadlab/spread.hpp"

namespace spreadlab::estimate {

enum class FitMethod { TruncatedTail, LogLog, LogLinear };

std::string method_name(FitMethod m);

struct TailFit {
  double estimate = 0.0;  // alpha-hat, or the regression slope
  double scale = 0.0;     // b for TruncatedTail, intercept otherwise
  std::pair<double, double> window{0.0, 0.0};
  double residual_sse = 0.0;
  std::size_t points_used = 0;
  FitMethod method = FitMethod::LogLog;
  double r2 = 0.0;
};

struct HillResult {
  std::size_t kappa = 0;
  double gamma_hat = 0.0;
  double tau_hat = 0.0;
  std::vector<std::pair<std::size_t, double>> kappa_sweep;
  bool plateau = true;  // false when select_kappa fell back to n^(2/3)
};

/// (1/kappa) * sum_{i<=kappa} log(x_(i) / x_(kappa+1)) over the descending
/// order statistics. Throws ValidationError if kappa is 0, kappa + 1
/// exceeds the sample size or a value is not positive.
double hill_estimator(std::span<const double> sample, std::size_t kappa);

struct KappaChoice {
  std::size_t kappa = 0;
  bool plateau = true;
  std::vector<std::pair<std::size_t, double>> sweep;
};

/// Plateau detection on the Hill plot: kappa runs over a geometric grid
/// from ceil(n^0.3) to ceil(n^0.8) and the largest kappa of the 7-point
/// window with the smallest variance of gamma-hat is returned. If that variance is
/// monotone along the grid there is no plateau and kappa = ceil(n^(2/3)).
/// Needs n >= 500; throws EstimationError when gamma-hat vanishes.
KappaChoice select_kappa(std::span<const double> sample);

/// select_kappa followed by hill_estimator.
HillResult estimate_tail_index(std::span<const double> sample);

struct TailPoint {
  double length = 0.0;
  double tail = 0.0;
};

/// Fraction of window edges with L < length <= L_plus, among those with
/// L_minus <= length <= L_plus, at each grid value. The first and last grid
/// points are pinned to 1 and 0. Throws EstimationError with fewer than
/// min_edges lengths in the window.
std::vector<TailPoint> empirical_truncated_tail(std::span<const double> lengths, double l_minus,
                                                double l_plus, std::span<const double> grid,
                                                std::size_t min_edges = 100);

/// Same on the edge lengths of g with a log-spaced grid of grid_points.
std::vector<TailPoint> empirical_truncated_tail(const SpatialGraph& g, double l_minus,
                                                double l_plus, std::size_t grid_points = 50);

std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// Least squares of log F against log(b (L^-k - L_plus^-k)), k = d (a - 1),
/// over the points with 0 < F < 1. The optimal log b is closed form for each
/// a; a is located on a coarse grid and refined by golden section.
/// Needs 10 usable points. Throws EstimationError when the minimum sits on
/// the edge of the search range.
TailFit fit_alpha(std::span<const TailPoint> tail, double l_plus, std::size_t d);

/// Ordinary least squares of log10 I against log10 t (LogLog) or t
/// (LogLinear) over the curve samples with i_low <= I <= i_high and t > 0.
/// Throws EstimationError with fewer than 5 samples.
TailFit fit_growth_exponent(const spread::EpidemicCurve& curve, double i_low, double i_high,
                            FitMethod mode);

enum class Shape { Concave, Linear, Convex };

std::string shape_name(Shape s);

struct ConcavityResult {
  Shape verdict = Shape::Linear;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;
  double p_value = 1.0;
  double statistic = 0.0;  // (negative - positive) / (negative + positive)
  std::size_t points_used = 0;
};

/// Sign test on the curvature of log10 I against t (LogLinear) or log10 t
/// (LogLog). Local slopes between consecutive samples are smoothed with a
/// width-5 rolling median; their successive differences are counted by
/// sign, with |diff| <= 1e-9 counted as zero. The majority sign decides
/// when its two-sided binomial p-value is below `level`.
ConcavityResult concavity_check(const spread::EpidemicCurve& curve, double i_low, double i_high,
                                FitMethod scale = FitMethod::LogLinear, double level = 0.01);

/// Two-sided P(|Bin(n, 1/2) - n/2| >= |k - n/2|).
double binomial_two_sided(std::size_t k, std::size_t n);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace spreadlab::estimate
