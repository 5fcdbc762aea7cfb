#include "collarlab/differentials.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "collarlab/operators.hpp"

namespace collarlab {

CaseTag case_of(std::size_t i, std::size_t j, std::size_t m) {
  if (i == j) return CaseTag::diagonal;
  return i < m ? CaseTag::degenerate : CaseTag::nondegenerate;
}

const char* case_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::diagonal: return "diagonal";
    case CaseTag::degenerate: return "degenerate";
    case CaseTag::nondegenerate: return "nondegenerate";
  }
  return "unknown";
}

const char* metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::wp: return "WP";
    case MetricKind::wp_cometric: return "WP-cometric";
    case MetricKind::ricci: return "Ricci";
    case MetricKind::perturbed_ricci: return "perturbed-Ricci";
  }
  return "unknown";
}

CoefficientTable::CoefficientTable(std::size_t n, std::size_t m) : indices(n), collars(m), data(n * m) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) at(i, j).tag = case_of(i, j, m);
}

int CoefficientTable::max_order() const {
  int k = 0;
  for (const auto& c : data)
    for (const auto& [order, v] : c.terms) k = std::max(k, std::abs(order));
  return k;
}

int default_bandwidth_for(int max_order) { return 2 * max_order + 8; }

Real MetricMatrix::hermitian_defect() const {
  const Real scale_ref = std::max<Real>(m.cwiseAbs().maxCoeff(), 1e-300L);
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale_ref;
}

bool MetricMatrix::is_hermitian(Real tol) const { return size() == 0 || hermitian_defect() <= tol; }

std::vector<Real> MetricMatrix::eigenvalues() const {
  const ComplexMatrix sym = (m + m.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym, Eigen::EigenvaluesOnly);
  std::vector<Real> out(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out[k] = es.eigenvalues()(k);
  return out;
}

bool MetricMatrix::is_positive_definite() const {
  if (size() == 0) return false;
  // Scale-free: entries span many decades, so test the Cholesky of the diagonally scaled matrix.
  Eigen::Matrix<Real, Eigen::Dynamic, 1> d(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Real v = m(i, i).real();
    if (!(v > 0)) return false;
    d(i) = 1 / std::sqrt(v);
  }
  const ComplexMatrix scaled = d.asDiagonal() * ((m + m.adjoint()) / Real(2)) * d.asDiagonal();
  Eigen::LLT<ComplexMatrix> llt(scaled);
  return llt.info() == Eigen::Success;
}

ComplexMatrix MetricMatrix::upper() const {
  if (singular || !is_positive_definite()) throw Error(Errc::singular, "metric matrix is not invertible");
  Eigen::Matrix<Real, Eigen::Dynamic, 1> d(size());
  for (std::size_t i = 0; i < size(); ++i) d(i) = 1 / std::sqrt(m(i, i).real());
  const ComplexMatrix scaled = d.asDiagonal() * m * d.asDiagonal();
  const ComplexMatrix inv = d.asDiagonal() * scaled.inverse() * d.asDiagonal();
  return inv.conjugate();
}

namespace {

void check_tag(const Coefficients& c, std::size_t i, std::size_t j, std::size_t m) {
  if (c.tag != case_of(i, j, m)) {
    std::ostringstream os;
    os << "case tag " << case_name(c.tag) << " does not match index " << i << " on collar " << j;
    throw Error(Errc::unknown_case, os.str());
  }
}

void check_sums(const Coefficients& c, Real cut, Real bound, const char* what) {
  Real neg = 0, pos = 0;
  for (const auto& [k, a] : c.terms) {
    if (k < 0) neg += std::abs(a) * std::pow(cut, static_cast<Real>(-k));
    if (k > 0) pos += std::abs(a) * std::pow(cut, static_cast<Real>(k));
  }
  if (neg > bound || pos > bound) {
    std::ostringstream os;
    os << what << " coefficient sums " << static_cast<double>(neg) << ", " << static_cast<double>(pos)
       << " exceed the bound " << static_cast<double>(bound);
    throw Error(Errc::coefficient_bound, os.str());
  }
}

void check_table(const CoefficientTable& t, const CollarSet& collars) {
  if (t.collars != collars.size()) throw Error(Errc::grid_mismatch, "spec collar count differs from the model");
  if (t.indices < collars.size()) throw Error(Errc::config, "fewer indices than degenerate collars");
}

}  // namespace

void validate(const QuadDiffSpec& spec, const CollarSet& collars) {
  check_table(spec.table, collars);
  const std::size_t m = collars.size();
  for (std::size_t i = 0; i < spec.table.indices; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Coefficients& c = spec.table.at(i, j);
      check_tag(c, i, j, m);
      check_sums(c, collars[j]->params.c, spec.bound, "quadratic-differential");
    }
}

void validate(const BeltramiSpec& spec, const CollarSet& collars) {
  check_table(spec.table, collars);
  const std::size_t m = collars.size();
  for (std::size_t i = 0; i < spec.table.indices; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Coefficients& c = spec.table.at(i, j);
      check_tag(c, i, j, m);
      const CollarParams& pj = collars[j]->params;
      Real sum_scale = 0, b_scale = 0;
      switch (c.tag) {
        case CaseTag::nondegenerate:
          sum_scale = 1 / (pj.u * pj.u);
          b_scale = pj.u;
          break;
        case CaseTag::degenerate: {
          const CollarParams& pi_ = collars[i]->params;
          const Real w = std::pow(pi_.u, 3) / pi_.rho;
          sum_scale = w / (pj.u * pj.u);
          b_scale = pj.u * w;
          break;
        }
        case CaseTag::diagonal:
          sum_scale = pj.u / pj.rho;
          b_scale = pj.u / pj.rho;
          break;
      }
      check_sums(c, pj.c, spec.bound * sum_scale, "Beltrami");
      if (std::abs(c.constant) > spec.bound * b_scale)
        throw Error(Errc::coefficient_bound, "Beltrami constant term exceeds its bound");
    }
}

CollarField qdiff_field(const QuadDiffSpec& spec, const CollarSet& collars, std::size_t i, std::size_t j) {
  const std::size_t m = collars.size();
  if (j >= m || i >= spec.table.indices) throw Error(Errc::config, "index or collar out of range");
  const Coefficients& c = spec.table.at(i, j);
  check_tag(c, i, j, m);
  check_sums(c, collars[j]->params.c, spec.bound, "quadratic-differential");
  const CollarPtr& col = collars[j];
  const CollarParams& p = col->params;
  Complex pref = 1;
  if (c.tag == CaseTag::diagonal) pref = -p.t / pi;
  if (c.tag == CaseTag::degenerate) pref = -collars[i]->params.t / pi;

  CollarField f(col, -2);
  const Real u = p.u;
  const Real log_t = std::log(std::abs(p.t));
  const Real arg_t = std::arg(p.t);
  const auto& tau = col->grid.nodes();
  if (c.constant != Complex{}) {
    Profile& g = f.mode(-2);
    for (auto& v : g) v = pref * c.constant;
  }
  for (const auto& [k, a] : c.terms) {
    if (k == 0 || a == Complex{}) continue;
    Profile& g = f.mode(k - 2);
    for (std::size_t s = 0; s < tau.size(); ++s) {
      // k < 0: t^{-k} z^k has modulus (|t| / r)^{-k}.
      const Complex radial = k > 0 ? Complex(std::exp(k * tau[s] / u))
                                   : std::polar(std::exp(-k * (log_t - tau[s] / u)), -k * arg_t);
      g[s] += pref * a * radial;
    }
  }
  f.prune();
  return f;
}

CollarField beltrami_field(const BeltramiSpec& spec, const CollarSet& collars, std::size_t i, std::size_t j) {
  const std::size_t m = collars.size();
  if (j >= m || i >= spec.table.indices) throw Error(Errc::config, "index or collar out of range");
  const Coefficients& c = spec.table.at(i, j);
  check_tag(c, i, j, m);
  const CollarPtr& col = collars[j];
  const CollarParams& p = col->params;
  const Real u = p.u;
  const Real log_rho = std::log(p.rho);
  const auto& tau = col->grid.nodes();
  CollarField f(col, 0);
  if (c.constant != Complex{}) {
    Profile& g = f.mode(2);
    for (std::size_t s = 0; s < tau.size(); ++s) g[s] = col->sin2[s] * std::conj(c.constant);
  }
  for (const auto& [k, a] : c.terms) {
    if (k == 0 || a == Complex{}) continue;
    // conj(a_k z^k) contributes angular mode -k; rho^{-k} r^k = (rho / r)^{-k} for k < 0.
    Profile& g = f.mode(2 - k);
    for (std::size_t s = 0; s < tau.size(); ++s) {
      const Real radial = k > 0 ? std::exp(k * tau[s] / u) : std::exp(-k * (log_rho - tau[s] / u));
      g[s] += col->sin2[s] * std::conj(a) * radial;
    }
  }
  f.prune();
  return f;
}

MetricMatrix wp_cometric(const QuadDiffSpec& spec, const CollarSet& collars,
                         const std::optional<ComplexMatrix>& remainder, bool strict) {
  validate(spec, collars);
  const std::size_t n = spec.table.indices;
  MetricMatrix out;
  out.kind = MetricKind::wp_cometric;
  out.m = ComplexMatrix::Zero(n, n);
  for (std::size_t j = 0; j < collars.size(); ++j) {
    const CollarField lam2 = mul(inverse_metric_field(collars[j]), inverse_metric_field(collars[j]));
    std::vector<CollarField> phi;
    for (std::size_t i = 0; i < n; ++i) phi.push_back(mul(qdiff_field(spec, collars, i, j), lam2));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        out.m(a, b) += inner(phi[a], qdiff_field(spec, collars, b, j));
  }
  if (remainder) out.m += *remainder;
  out.singular = !out.is_positive_definite();
  if (out.singular && strict) throw Error(Errc::singular, "WP cometric is not positive definite");
  return out;
}

MetricMatrix wp_metric(const BeltramiSpec& spec, const CollarSet& collars,
                       const std::optional<ComplexMatrix>& remainder) {
  validate(spec, collars);
  const std::size_t n = spec.table.indices;
  MetricMatrix out;
  out.kind = MetricKind::wp;
  out.m = ComplexMatrix::Zero(n, n);
  for (std::size_t j = 0; j < collars.size(); ++j) {
    std::vector<CollarField> a;
    for (std::size_t i = 0; i < n; ++i) a.push_back(beltrami_field(spec, collars, i, j));
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) out.m(x, y) += inner(a[x], a[y]);
  }
  if (remainder) out.m += *remainder;
  if (!out.is_hermitian(1e-12L)) throw Error(Errc::not_hermitian, "WP metric fails Hermitian symmetry");
  out.singular = !out.is_positive_definite();
  return out;
}

CollarField dual_beltrami_field(const QuadDiffSpec& q, const MetricMatrix& h, const CollarSet& collars,
                                std::size_t i, std::size_t j) {
  const CollarPtr& col = collars.at(j);
  CollarField sum(col, -2);
  for (std::size_t l = 0; l < q.table.indices; ++l)
    sum = add(sum, scale(conj(qdiff_field(q, collars, l, j)), h(i, l)));
  return mul(inverse_metric_field(col), sum);
}

BeltramiSpec dual_beltrami_spec(const QuadDiffSpec& q, const MetricMatrix& h, const CollarSet& collars) {
  const std::size_t n = q.table.indices, m = collars.size();
  BeltramiSpec out;
  out.bound = q.bound;
  out.table = CoefficientTable(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    const CollarParams& p = collars[j]->params;
    const Complex phase = p.t / std::abs(p.t);
    const Real s = 2 / (p.u * p.u);
    for (std::size_t i = 0; i < n; ++i) {
      Coefficients& c = out.table.at(i, j);
      for (std::size_t l = 0; l < n; ++l) {
        const Coefficients& ql = q.table.at(l, j);
        Complex pref = 1;
        if (ql.tag == CaseTag::diagonal) pref = -p.t / pi;
        if (ql.tag == CaseTag::degenerate) pref = -collars[l]->params.t / pi;
        const Complex w = s * std::conj(h(i, l)) * pref;
        c.constant += w * ql.constant;
        for (const auto& [k, a] : ql.terms)
          c.terms[k] += k > 0 ? w * a : w * a * std::pow(phase, static_cast<Real>(-k));
      }
    }
  }
  return out;
}

DualityReport duality_check(const QuadDiffSpec& q, const BeltramiSpec& b, const MetricMatrix& h,
                            const CollarSet& collars) {
  DualityReport rep;
  const std::size_t n = b.table.indices;
  for (std::size_t j = 0; j < collars.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const CollarField a = beltrami_field(b, collars, i, j);
      const CollarField d = dual_beltrami_field(q, h, collars, i, j);
      DualityEntry e;
      e.index = i;
      e.collar = j;
      e.distance = sup_norm(sub(a, d));
      const Real ref = std::max(sup_norm(a), sup_norm(d));
      e.relative = ref > 0 ? e.distance / ref : 0;
      rep.max_relative = std::max(rep.max_relative, e.relative);
      rep.entries.push_back(e);
    }
  return rep;
}

Model pure_family(const std::vector<Real>& us, const FamilyOptions& opt) {
  const std::size_t m = us.size();
  const std::size_t n = m + opt.nondegenerate;
  Model model;
  model.n = n;
  const int bw = opt.bandwidth > 0 ? opt.bandwidth : default_bandwidth_for(0);
  for (Real u : us) model.collars.push_back(make_collar(collar_from_u(u, opt.c), opt.intervals, bw));
  model.beltrami.table = CoefficientTable(n, m);
  model.quad.table = CoefficientTable(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const CollarParams& pj = model.collars[j]->params;
      Coefficients& b = model.beltrami.table.at(i, j);
      Coefficients& q = model.quad.table.at(i, j);
      switch (b.tag) {
        case CaseTag::diagonal:
          b.constant = -pj.u / (pi * std::conj(pj.t));
          q.constant = 1;
          break;
        case CaseTag::degenerate: {
          const CollarParams& pi_ = model.collars[i]->params;
          b.constant = opt.kappa * pj.u * std::pow(pi_.u, 3) / pi_.rho;
          break;
        }
        case CaseTag::nondegenerate:
          b.constant = opt.nondegenerate_b * pj.u;
          break;
      }
    }
  model.h_remainder = ComplexMatrix::Zero(n, n);
  model.tau_remainder = ComplexMatrix::Zero(n, n);
  for (std::size_t i = m; i < n; ++i) {
    model.h_remainder(i, i) = opt.nondegenerate_scale;
    model.tau_remainder(i, i) = opt.nondegenerate_scale;
  }
  return model;
}

}  // namespace collarlab
