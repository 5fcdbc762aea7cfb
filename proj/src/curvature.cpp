#include "collarlab/curvature.hpp"

#include <cmath>

#include "collarlab/operators.hpp"

namespace collarlab {

CurvatureTensor::CurvatureTensor(std::size_t n, TensorKind kind) : n_(n), kind_(kind), v_(n * n * n * n) {}

Complex& CurvatureTensor::operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return v_[((i * n_ + j) * n_ + k) * n_ + l];
}
Complex CurvatureTensor::operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return v_[((i * n_ + j) * n_ + k) * n_ + l];
}

namespace {

Real max_abs(const std::vector<Complex>& v) {
  Real m = 0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Real CurvatureTensor::hermitian_defect() const {
  const Real ref = max_abs(v_);
  if (ref == 0) return 0;
  Real worst = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t l = 0; l < n_; ++l)
          worst = std::max(worst, std::abs((*this)(i, j, k, l) - std::conj((*this)(j, i, l, k))));
  return worst / ref;
}

Real CurvatureTensor::pair_symmetry_defect() const {
  const Real ref = max_abs(v_);
  if (ref == 0) return 0;
  Real worst = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t l = 0; l < n_; ++l) {
          const Complex r = (*this)(i, j, k, l);
          worst = std::max(worst, std::abs(r - (*this)(k, j, i, l)));
          worst = std::max(worst, std::abs(r - (*this)(i, l, k, j)));
        }
  return worst / ref;
}

Complex reduced_q_pairing(const CollarField& e, const CollarField& f) {
  const CollarField k0 = maass(0, e, Maass::K);
  const CollarField weight = sub(scale(e, 2), scale(f, 4));
  return pair_integral(mul(k0, conj(k0)), weight);
}

QPairing q_pairing_identity(const CollarField& e_kl, const CollarField& e_ij, const CollarField& e_ab) {
  const CollarField f_kl = apply_box1(e_kl);
  QPairing out;
  out.direct = pair_integral(q_operator(e_kl, f_kl, e_ij), e_ab);
  const CollarField k_ij = maass(0, e_ij, Maass::K), kb_ij = maass(0, e_ij, Maass::L);
  const CollarField k_ab = maass(0, e_ab, Maass::K), kb_ab = maass(0, e_ab, Maass::L);
  const CollarField kb_kl = maass(0, e_kl, Maass::L);
  const CollarField first = mul(f_kl, add(mul(k_ij, kb_ab), mul(kb_ij, k_ab)));
  const CollarField second = add(mul(mul(box(e_ij), k_ab), kb_kl), mul(mul(box(e_ab), k_ij), kb_kl));
  out.reduced = -volume_integral(first) - volume_integral(second);
  return out;
}

std::size_t CurvatureEngine::idx(std::initializer_list<std::size_t> ix) const {
  std::size_t out = 0;
  for (std::size_t v : ix) out = out * model_.n + v;
  return out;
}

CurvatureEngine::CurvatureEngine(Model model, const SolverConfig& cfg) : model_(std::move(model)), cfg_(cfg) {
  const std::size_t n = model_.n, m = model_.m();
  validate(model_.beltrami, model_.collars);
  A_.resize(m);
  f_.resize(m);
  e_.resize(m);
  xi_.resize(m);
  txi_.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) A_[c].push_back(beltrami_field(model_.beltrami, model_.collars, i, c));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        f_[c].push_back(mul(A_[c][i], conj(A_[c][j])));
        SolveDiagnostics diag;
        e_[c].push_back(solve_T(f_[c].back(), cfg_, &diag));
        support_warning_ = support_warning_ || diag.support_warning;
      }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          xi_[c].push_back(xi(A_[c][k], e_[c][idx({i, j})]));
          SolverConfig quiet = cfg_;
          quiet.check_support = false;
          txi_[c].push_back(solve_T(xi_[c].back(), quiet));
        }
  }

  h_ = wp_metric(model_.beltrami, model_.collars, model_.h_remainder);
  h_up_ = h_.upper();

  R_ = CurvatureTensor(n, TensorKind::wp);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          Complex acc{};
          for (std::size_t c = 0; c < m; ++c)
            acc += pair_integral(e_[c][idx({i, j})], f_[c][idx({k, l})]) +
                   pair_integral(e_[c][idx({i, l})], f_[c][idx({k, j})]);
          R_(i, j, k, l) = acc;
        }

  tau_.kind = MetricKind::ricci;
  tau_.m = model_.tau_remainder;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) tau_.m(i, j) += h_up_(a, b) * R_(i, j, a, b);
  if (!tau_.is_hermitian(1e-10L)) throw Error(Errc::not_hermitian, "Ricci metric fails Hermitian symmetry");
  if (!tau_.is_positive_definite())
    throw Error(Errc::not_positive_definite, "Ricci metric is not positive definite");
  tau_up_ = tau_.upper();

  const std::size_t n5 = n * n * n * n * n;
  W_.assign(n5, Complex{});
  Y_.assign(n5, Complex{});
  V_.assign(n5 * n, Complex{});
  Q_.assign(n5 * n, Complex{});
  for (std::size_t c = 0; c < m; ++c) {
    const auto& e = e_[c];
    const auto& xs = xi_[c];
    const auto& ts = txi_[c];
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < n; ++q)
          for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
              W_[idx({k, i, q, a, b})] += pair_integral(xs[idx({k, i, q})], e[idx({a, b})]);
              // conj-xi_l(e_{pj}) = conj(xi_l(e_{jp})).
              Y_[idx({k, i, q, a, b})] += inner(e[idx({a, b})], xs[idx({k, q, i})]);
            }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y)
              for (std::size_t z = 0; z < n; ++z)
                V_[idx({k, i, j, x, y, z})] += inner(ts[idx({k, i, j})], xs[idx({x, z, y})]);

    const CollarField lam_inv = inverse_metric_field(model_.collars[c]);
    std::vector<CollarField> pbar_e, dz_f, p_e, box_e, dzbar_e;
    for (std::size_t s = 0; s < n * n; ++s) {
      pbar_e.push_back(op_Pbar(e[s]));
      dz_f.push_back(mul(lam_inv, dz(f_[c][s])));
      p_e.push_back(op_P(e[s]));
      box_e.push_back(box(e[s]));
      dzbar_e.push_back(dzbar(e[s]));
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t kl = idx({k, l}), ij = idx({i, j});
            const CollarField qf = add(add(mul(pbar_e[kl], p_e[ij]), scale(mul(f_[c][kl], box_e[ij]), -2)),
                                       mul(dz_f[kl], dzbar_e[ij]));
            for (std::size_t a = 0; a < n; ++a)
              for (std::size_t b = 0; b < n; ++b) Q_[idx({k, l, i, j, a, b})] += pair_integral(qf, e[idx({a, b})]);
          }
  }
}

const CollarField& CurvatureEngine::A(std::size_t i, std::size_t col) const { return A_.at(col).at(i); }
const CollarField& CurvatureEngine::f(std::size_t i, std::size_t j, std::size_t col) const {
  return f_.at(col).at(idx({i, j}));
}
const CollarField& CurvatureEngine::e(std::size_t i, std::size_t j, std::size_t col) const {
  return e_.at(col).at(idx({i, j}));
}
const CollarField& CurvatureEngine::xi_e(std::size_t k, std::size_t i, std::size_t j, std::size_t col) const {
  return xi_.at(col).at(idx({k, i, j}));
}
const CollarField& CurvatureEngine::t_xi_e(std::size_t k, std::size_t i, std::size_t j, std::size_t col) const {
  return txi_.at(col).at(idx({k, i, j}));
}

Complex CurvatureEngine::W(std::size_t k, std::size_t i, std::size_t q, std::size_t a, std::size_t b) const {
  return W_[idx({k, i, q, a, b})];
}
Complex CurvatureEngine::Y(std::size_t l, std::size_t p, std::size_t j, std::size_t g, std::size_t d) const {
  return Y_[idx({l, p, j, g, d})];
}
Complex CurvatureEngine::V(std::size_t k, std::size_t i, std::size_t j, std::size_t x, std::size_t y,
                           std::size_t z) const {
  return V_[idx({k, i, j, x, y, z})];
}
Complex CurvatureEngine::Qint(std::size_t k, std::size_t l, std::size_t i, std::size_t j, std::size_t a,
                              std::size_t b) const {
  return Q_[idx({k, l, i, j, a, b})];
}

RicciBlocks CurvatureEngine::assemble(std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                                      const ComplexMatrix& tau_up, Filter filter) const {
  const std::size_t n = model_.n;
  // Leading terms: every contracted index equals the reference index i.
  auto keep = [&](std::initializer_list<std::size_t> contracted) {
    if (filter == Filter::all) return true;
    bool all_i = true;
    for (std::size_t v : contracted) all_i = all_i && v == i;
    return filter == Filter::leading ? all_i : !all_i;
  };
  RicciBlocks out;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (!keep({a, b})) continue;
      Complex sa{}, sb{};
      for (const Triple& p : permutations3({static_cast<int>(i), static_cast<int>(k), static_cast<int>(a)})) {
        const std::size_t i1 = p[0], k1 = p[1], a1 = p[2];
        for (int swap = 0; swap < 2; ++swap) {
          const std::size_t j1 = swap ? b : j, b1 = swap ? j : b;
          sa += V(k1, i1, j1, l, a1, b1) + V(k1, i1, j1, b1, a1, l);
        }
        sb += Qint(k1, l, i1, j, a1, b);
      }
      out.a += h_up_(a, b) * sa;
      out.b += h_up_(a, b) * sb;
    }

  // S1(q, a, b) = sigma1 int xi_k(e_{iq}) e_{ab};  S2(p, g, d) = sigma1~ int conj-xi_l(e_{pj}) e_{gd}.
  std::vector<Complex> s1(n * n * n), s2(n * n * n);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        Complex acc{};
        for (const Triple& p : permutations3({static_cast<int>(i), static_cast<int>(k), static_cast<int>(a)}))
          acc += W(p[1], p[0], q, p[2], b);
        s1[(q * n + a) * n + b] = acc;
      }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t d = 0; d < n; ++d) {
        Complex acc{};
        for (const Triple& t : permutations3({static_cast<int>(j), static_cast<int>(l), static_cast<int>(d)}))
          acc += Y(t[1], p, t[0], g, t[2]);
        s2[(p * n + g) * n + d] = acc;
      }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t g = 0; g < n; ++g)
            for (std::size_t d = 0; d < n; ++d) {
              if (!keep({p, q, a, b, g, d})) continue;
              out.c -= tau_up(p, q) * h_up_(a, b) * h_up_(g, d) * s1[(q * n + a) * n + b] * s2[(p * n + g) * n + d];
            }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      if (!keep({p, q})) continue;
      out.d += tau_.m(p, j) * h_up_(p, q) * R_(i, q, k, l);
    }
  return out;
}

RicciBlocks CurvatureEngine::ricci_curvature(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return assemble(i, j, k, l, tau_up_, Filter::all);
}

MetricMatrix CurvatureEngine::perturbed_metric(Real C) const {
  if (C < 0) throw Error(Errc::config, "perturbation constant must be nonnegative");
  MetricMatrix out;
  out.kind = MetricKind::perturbed_ricci;
  out.m = tau_.m + C * h_.m;
  out.singular = !out.is_positive_definite();
  return out;
}

RicciBlocks CurvatureEngine::perturbed_curvature(std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                                                 Real C) const {
  RicciBlocks out = assemble(i, j, k, l, perturbed_metric(C).upper(), Filter::all);
  out.perturbation = C * R_(i, j, k, l);
  return out;
}

CurvatureTensor CurvatureEngine::ricci_tensor() const {
  const std::size_t n = model_.n;
  CurvatureTensor t(n, TensorKind::ricci);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) t(i, j, k, l) = ricci_curvature(i, j, k, l).total();
  return t;
}

G1Report CurvatureEngine::g1_report(std::size_t i, const ComplexMatrix& tau_up, Real C) const {
  if (i >= model_.m()) throw Error(Errc::config, "G1 terms are defined for degenerate directions");
  const CollarParams& p = model_.collars[i]->params;
  G1Report rep;
  rep.index = i;
  rep.u = p.u;
  rep.t_abs = p.rho;
  rep.scale = std::pow(p.u / p.rho, 4);
  const RicciBlocks lead = assemble(i, i, i, i, tau_up, Filter::leading);
  const RicciBlocks rest = assemble(i, i, i, i, tau_up, Filter::remainder);
  rep.terms = {lead.a, lead.b, lead.c, lead.d};
  rep.g2_blocks = {rest.a, rest.b, rest.c, rest.d};
  rep.g2 = rest.a + rest.b + rest.c + rest.d;
  Complex reduced{};
  for (std::size_t c = 0; c < model_.m(); ++c)
    reduced += reduced_q_pairing(e_[c][idx({i, i})], f_[c][idx({i, i})]);
  rep.term2_reduced = Real(6) * h_up_(i, i) * reduced;
  const Real unit = rep.scale / (16 * std::pow(pi, 4));
  const Real damp = 1 / (1 + 2 * pi * pi * C * p.u / 3);
  rep.targets = {9 * unit, -9 * unit, -3 * unit * damp, 9 * unit};
  rep.sum = lead.a + lead.b + lead.c + lead.d + C * R_(i, i, i, i);
  rep.target_sum = rep.targets[0] + rep.targets[1] + rep.targets[2] + rep.targets[3] +
                   3 * C / (8 * pi * pi) * std::pow(p.u, 5) / std::pow(p.rho, 4);
  for (std::size_t s = 0; s < 4; ++s) rep.rel_err[s] = std::abs(rep.terms[s] - rep.targets[s]) / std::abs(rep.targets[s]);
  rep.sum_rel_err = std::abs(rep.sum - rep.target_sum) / std::abs(rep.target_sum);
  return rep;
}

G1Report CurvatureEngine::g1_terms(std::size_t i) const { return g1_report(i, tau_up_, 0); }

G1Report CurvatureEngine::perturbed_g1_terms(std::size_t i, Real C) const {
  return g1_report(i, perturbed_metric(C).upper(), C);
}

Real perturbed_determinant_ratio(const CurvatureEngine& engine, Real C) {
  const MetricMatrix pt = engine.perturbed_metric(C);
  const std::size_t n = engine.n(), m = engine.m();
  // Scale each degenerate row/column by its leading size so the determinant stays representable.
  ComplexMatrix scaled = pt.m;
  for (std::size_t i = 0; i < m; ++i) {
    const CollarParams& p = engine.model().collars[i]->params;
    const Real lead = (p.u * p.u / (p.rho * p.rho)) * (3 / (4 * pi * pi) + C * p.u / 2);
    const Real s = 1 / std::sqrt(lead);
    scaled.row(i) *= s;
    scaled.col(i) *= s;
  }
  const Complex det_scaled = scaled.determinant();
  Complex det_block = 1;
  if (n > m) {
    const ComplexMatrix a = engine.ricci_metric().m.bottomRightCorner(n - m, n - m);
    const ComplexMatrix b = engine.wp().m.bottomRightCorner(n - m, n - m);
    det_block = (a + C * b).determinant();
  }
  return std::abs(det_scaled / det_block);
}

}  // namespace collarlab
