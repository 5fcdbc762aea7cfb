#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "collarlab/fields.hpp"

namespace collarlab {

using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

// Index i relative to collar j, with m degenerate directions (indices 0..m-1 own collars 0..m-1).
enum class CaseTag { diagonal, degenerate, nondegenerate };
CaseTag case_of(std::size_t i, std::size_t j, std::size_t m);
const char* case_name(CaseTag tag);

// Laurent data sum_k a_k z^k (k != 0) plus a constant.
struct Coefficients {
  CaseTag tag = CaseTag::diagonal;
  std::map<int, Complex> terms;
  Complex constant{};
};

// Entries for every index i (rows) on every collar j (columns).
struct CoefficientTable {
  std::size_t indices = 0;
  std::size_t collars = 0;
  std::vector<Coefficients> data;

  CoefficientTable() = default;
  CoefficientTable(std::size_t n, std::size_t m);
  Coefficients& at(std::size_t i, std::size_t j) { return data.at(i * collars + j); }
  const Coefficients& at(std::size_t i, std::size_t j) const { return data.at(i * collars + j); }
  int max_order() const;
};

// alpha_k, beta of phi_i on each collar.
struct QuadDiffSpec {
  CoefficientTable table;
  Real bound = 10;  // M in the coefficient-sum bounds
};

// a_k, b of A_i on each collar.
struct BeltramiSpec {
  CoefficientTable table;
  Real bound = 10;
};

enum class MetricKind { wp, wp_cometric, ricci, perturbed_ricci };
const char* metric_kind_name(MetricKind kind);

struct MetricMatrix {
  ComplexMatrix m;
  MetricKind kind = MetricKind::wp;
  bool singular = false;

  std::size_t size() const { return static_cast<std::size_t>(m.rows()); }
  Complex operator()(std::size_t i, std::size_t j) const { return m(i, j); }
  Real hermitian_defect() const;
  bool is_hermitian(Real tol = 1e-12L) const;
  bool is_positive_definite() const;
  std::vector<Real> eigenvalues() const;
  // Inverse with the index convention h^{a b} = conj(H^{-1})(a, b), so that h^{a b} h_{c b} = delta.
  ComplexMatrix upper() const;
};

using CollarSet = std::vector<CollarPtr>;

// phi_i on collar j: prefactor * z^-2 (q(z) + beta).
CollarField qdiff_field(const QuadDiffSpec& spec, const CollarSet& collars, std::size_t i, std::size_t j);
// A_i on collar j: (z / zbar) sin^2 tau (conj p + conj b).
CollarField beltrami_field(const BeltramiSpec& spec, const CollarSet& collars, std::size_t i, std::size_t j);

void validate(const QuadDiffSpec& spec, const CollarSet& collars);
void validate(const BeltramiSpec& spec, const CollarSet& collars);

// h^{i j} = sum over collars int phi_i conj(phi_j) lambda^-2 dv (+ remainder).
MetricMatrix wp_cometric(const QuadDiffSpec& spec, const CollarSet& collars,
                         const std::optional<ComplexMatrix>& remainder = std::nullopt, bool strict = true);
// h_{i j} = sum over collars int A_i conj(A_j) dv (+ remainder).
MetricMatrix wp_metric(const BeltramiSpec& spec, const CollarSet& collars,
                       const std::optional<ComplexMatrix>& remainder = std::nullopt);

// A_i^dual = lambda^-1 sum_l h_{i l} conj(phi_l) on collar j.
CollarField dual_beltrami_field(const QuadDiffSpec& q, const MetricMatrix& h, const CollarSet& collars,
                                std::size_t i, std::size_t j);
// Laurent data of the exact dual; same collar geometry and bandwidth.
BeltramiSpec dual_beltrami_spec(const QuadDiffSpec& q, const MetricMatrix& h, const CollarSet& collars);

struct DualityEntry {
  std::size_t index = 0;
  std::size_t collar = 0;
  Real distance = 0;  // sup |A - A_dual|
  Real relative = 0;  // distance / ||A||_0
};
struct DualityReport {
  std::vector<DualityEntry> entries;
  Real max_relative = 0;
};
DualityReport duality_check(const QuadDiffSpec& q, const BeltramiSpec& b, const MetricMatrix& h,
                            const CollarSet& collars);

// Collars, Laurent data and compact-part remainders of one model configuration.
struct Model {
  CollarSet collars;  // one per degenerate direction
  std::size_t n = 0;  // indices; n - collars.size() nondegenerate
  BeltramiSpec beltrami;
  QuadDiffSpec quad;
  ComplexMatrix h_remainder;    // added to the WP metric
  ComplexMatrix tau_remainder;  // added to the Ricci metric

  std::size_t m() const { return collars.size(); }
};

struct FamilyOptions {
  Real c = 0.5L;
  int intervals = default_intervals;
  int bandwidth = 0;            // 0: 2K + 8
  Real kappa = 1;               // off-diagonal coupling b_i^j = kappa u_j u_i^3 / |t_i|
  std::size_t nondegenerate = 0;
  Real nondegenerate_scale = 1; // h and tau blocks of the nondegenerate directions
  Real nondegenerate_b = 0.5L;  // b_i^j = value * u_j for nondegenerate i
};

// Pure family: q = 0, beta = 1, p = 0, b = -u / (pi conj t), t real positive.
Model pure_family(const std::vector<Real>& us, const FamilyOptions& opt = {});
// Default bandwidth rule 2K + 8.
int default_bandwidth_for(int max_order);

}  // namespace collarlab
