#pragma once

#include <string>

#include "collarlab/curvature.hpp"

namespace collarlab {

struct CutoffSpec {
  Real c = 0.5L;
  Real c1 = 0.35L;
  Real c2 = 0.25L;
  void validate() const;
};

enum class CutoffKind { eta, eta1 };

struct CutoffValue {
  Real value = 0;
  Real d1 = 0;  // d/dx
  Real d2 = 0;  // d^2/dx^2
};

// C^infinity step S(y) = phi(y) / (phi(y) + phi(1-y)), phi(y) = e^{-1/y}; 0 for y <= 0, 1 for y >= 1.
CutoffValue smooth_step(Real y);
// eta: 1 for x <= log c1, 0 for x >= log c.  eta1: 1 for x <= log c2, 0 for x >= log c1.
CutoffValue cutoff_eval(const CutoffSpec& spec, CutoffKind which, Real x);

// Collar-localized approximants; one entry per collar (zero fields off the support).
struct Approximants {
  CaseTag tag = CaseTag::diagonal;
  std::vector<CollarField> e_tilde;
  std::vector<CollarField> f_tilde;
  std::vector<CollarField> d;  // only for i == j
};

// Product of the outer taper at log r and the inner taper at log rho - log r.
CollarField taper_field(const CollarPtr& collar, const CutoffSpec& spec, CutoffKind which);

Approximants build_approximants(const Model& model, std::size_t i, std::size_t j, const CutoffSpec& cut = {});

struct AsymptoticTarget {
  std::string id;
  Complex constant;
  Real u_exponent = 0;
  Real t_exponent = 0;
  std::string source;
  Real tolerance = 0.15L;
  bool order_only = false;  // only the exponent is predicted

  // constant * u^a * |t|^b
  Complex value(Real u, Real t_abs) const;
};

std::vector<AsymptoticTarget> target_table();
const AsymptoticTarget& target(const std::string& id);

struct FitResult {
  Real constant = 0;
  Real exponent = 0;
  Real correction = 0;  // coefficient of the linear-in-u term
  Real r2 = 0;
  Real plain_exponent = 0;  // two-parameter least squares
  Real local_exponent = 0;  // slope through the two smallest u
  std::vector<Real> residuals;
  bool degenerate = false;  // r2 < 0.9
};

// log|v| + (pi b / u) = log C + p log u + a u; |t| = e^{-pi/u} removes the declared |t|^b.
FitResult fit_power_law(const std::vector<std::pair<Real, Real>>& samples, Real t_exponent = 0);

struct LengthEntry {
  Real t = 0, u = 0;
  Real fd = 0;           // holomorphic derivative of l along real t by central differences
  Complex predicted{};   // -pi u conj(b)
  Real closed_form = 0;  // pi^2 / (t log^2 t)
  Real rel_err = 0;      // |fd - predicted| / |fd|
  Real log_length_sq = 0;     // |d log l|^2 from the difference quotient
  Real quarter_b_sq = 0;      // |b|^2 / 4
};
struct LengthReport {
  std::vector<LengthEntry> entries;
};
// b defaults to the pure-family value -u / (pi conj t).
LengthReport geodesic_length_derivative_check(const std::vector<Real>& ts,
                                              const std::vector<Complex>& bs = {});

struct EquivalenceEntry {
  Real u = 0, t_abs = 0;
  Real poincare = 0;  // tau_ii / (1 / (4 |t|^2 log^2 |t|))
  Real mcmullen = 0;  // (h_ii + sum_j |b_i^j|^2 / 4) / tau_ii
};
EquivalenceEntry equivalence_ratios(const CurvatureEngine& engine, std::size_t i = 0);

struct G2Entry {
  Real u = 0, t_abs = 0;
  std::array<Complex, 4> cases{};  // Case 1..4: blocks d, a, c, b restricted to non-leading terms
  Complex case1_term{};            // tau_{p i} h^{p q} R_{i q i i} with p = q = 1
  Complex case3_term{};            // h^{ab} sigma1 int xi_i(e_{i q}) e_{ab} with q = 1
};
struct G2Report {
  std::vector<G2Entry> entries;
  std::array<FitResult, 4> fits;
};
G2Entry g2_entry(const CurvatureEngine& engine);
G2Report g2_spotcheck(const std::vector<Real>& us, Real kappa = 1, int intervals = default_intervals);

// Pure-family leading term of the diagonal holomorphic sectional curvature.
inline Real holo_target(Real u, Real t_abs) { return 3 * std::pow(u, 4) / (8 * std::pow(pi, 4) * std::pow(t_abs, 4)); }
Real perturbed_target(Real u, Real t_abs, Real C);

}  // namespace collarlab
