#pragma once

#include <optional>
#include <string>
#include <vector>

namespace spreadlab::theory {

/// Parameters of the growth classification. alpha may be infinite
/// (threshold GIRG). nu is the receiver exponent; only nu == mu is
/// supported by the classification.
struct ModelPoint {
  int d = 2;
  double tau = 2.5;
  double alpha = 2.0;
  double mu = 0.0;
  double zeta = 0.0;
  std::optional<double> nu;

  void validate() const;
  double s() const { return mu + zeta / d; }
};

enum class Phase { Explosive, QuasiExponential, Polynomial, Geometric };
enum class Region { A, B, C, D, E, F, G };

std::string phase_name(Phase p);
char region_letter(Region r);

inline constexpr double kDefaultTol = 1e-9;

/// The three polynomial cost exponents; absent when undefined (alpha
/// infinite for eta1 and eta2).
struct Etas {
  std::optional<double> eta1, eta2, eta3;
};
Etas compute_etas(const ModelPoint& m);

struct PhaseReport {
  Phase phase = Phase::Geometric;
  Region region = Region::G;
  std::optional<double> phi;        // quasi-exponential stretch exponent
  std::optional<double> delta;      // 1 / phi
  std::optional<double> psi;        // polynomial exponent; 1 in the geometric phase
  std::optional<double> eta_star;   // defined in the polynomial and geometric phases
  std::optional<double> s_star;     // same domain; may be +infinity
  bool boundary = false;            // a defining comparison was within tol
  bool upper_bound_only = false;    // region C: the exponent is only an upper bound
};

/// Classifies a point by the growth-phase inequality system. Comparisons
/// within `tol` of equality set `boundary` and resolve towards the slower
/// phase. Throws ValidationError for nu != mu.
PhaseReport classify(const ModelPoint& m, double tol = kDefaultTol);

struct PhiResult {
  double phi;
  Region region;  // B or C
  double delta;
};
/// Throws StateError unless the point is quasi-exponential.
PhiResult compute_phi(const ModelPoint& m, double tol = kDefaultTol);

struct PsiResult {
  double psi;
  Region region;  // D, E, F, or G
  double eta_star;
};
/// Throws StateError in the explosive and quasi-exponential phases.
PsiResult compute_psi(const ModelPoint& m, double tol = kDefaultTol);

/// eta_star: the smallest gated eta, or 1 when no gate is open.
double compute_eta_star(const ModelPoint& m);

struct SStar {
  std::optional<double> value;  // +infinity when no candidate applies
  std::string reason;           // why the value is undefined
};
/// Lower-bound exponent; undefined unless zeta/d > 2 - alpha and
/// mu + zeta/d > 3 - tau.
SStar compute_s_star(const ModelPoint& m);

/// Lambda(s, gamma, x) from the hierarchical path construction.
double lambda_value(double s, double gamma, double x, const ModelPoint& m);

struct LambdaSearchOptions {
  double s_step = 1e-3;
  int x_grid = 1000;
};

struct LambdaSearchResult {
  double s_min = 0.0;            // +infinity when no s is feasible
  double gamma_opt = 0.0;
  double x_opt = 0.0;
  bool feasible_at_zero = false;
  std::optional<double> gamma_inf;         // set when feasible at s = 0
  std::optional<double> delta_from_gamma;  // 1 / log2(1 / gamma_inf)
};

/// Smallest grid value of s for which Lambda(s, gamma, x) > 0 for some
/// gamma in (0, 1), x in [0, 1]. For fixed s the maximum over x is attained
/// at an endpoint or a kink, and it does not decrease in gamma.
LambdaSearchResult lambda_search(const ModelPoint& m, const LambdaSearchOptions& opts = {});

/// max over x in [0, 1] of Lambda(s, gamma, x), and the maximiser.
std::pair<double, double> lambda_max_over_x(double s, double gamma, const ModelPoint& m,
                                            int x_grid = 1000);

enum class TailRegime { AlphaLess, AlphaEqual, AlphaGreater };
std::string regime_name(TailRegime r);

struct EdgeTailParams {
  int d = 2;
  double tau = 2.78;
  double alpha = 1.2;
  double c = 1.0;
  std::optional<double> weight_cap;  // M
  double l1_floor = 10.0;            // warn below this L1
};

struct EdgeTailPrediction {
  TailRegime regime = TailRegime::AlphaLess;
  std::optional<double> c1, c2, c3, c4;
  /// Asymptotic count over [L1, L2] per node over ordered pairs,
  /// which counts each edge from both endpoints.
  double predicted = 0.0;
  /// Same, for the weight-capped edges (when M is given).
  std::optional<double> predicted_capped;
  /// predicted / 2: undirected edges per node.
  double predicted_undirected = 0.0;
  bool below_floor = false;
};

/// Surface area of the unit sphere in R^d.
double unit_sphere_surface(int d);

/// Throws ValidationError for L1 > L2, alpha <= 1, tau <= 2 or infinite alpha.
EdgeTailPrediction edge_tail_theory(double l1, double l2, const EdgeTailParams& p,
                                    double tol = kDefaultTol);

struct Axis {
  std::string name;  // mu | zeta | alpha | tau
  double lo = 0.0, hi = 1.0;
  int steps = 10;
  double value(int i) const { return steps <= 1 ? lo : lo + (hi - lo) * i / (steps - 1); }
};

struct DiagramCell {
  double x, y;
  PhaseReport report;
  double exponent;  // phi for B/C, psi for D-G, NaN for A
};

/// Classifies every grid point. `base` supplies the fixed parameters.
std::vector<DiagramCell> phase_diagram_grid(const ModelPoint& base, const Axis& x, const Axis& y,
                                            double tol = kDefaultTol);

/// Sets parameter `name` of m; throws ValidationError for unknown names.
void set_parameter(ModelPoint& m, const std::string& name, double value);

}  // namespace spreadlab::theory
