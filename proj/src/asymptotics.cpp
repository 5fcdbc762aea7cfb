#include "collarlab/asymptotics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace collarlab {

void CutoffSpec::validate() const {
  if (!(0 < c2 && c2 < c1 && c1 < c && c < 1)) throw Error(Errc::config, "cutoffs need 0 < c2 < c1 < c < 1");
}

CutoffValue smooth_step(Real y) {
  if (y <= 0) return {0, 0, 0};
  if (y >= 1) return {1, 0, 0};
  auto phi = [](Real x) { return std::exp(-1 / x); };
  auto dphi = [](Real x) { return std::exp(-1 / x) / (x * x); };
  auto ddphi = [](Real x) { return std::exp(-1 / x) * (1 / std::pow(x, 4) - 2 / std::pow(x, 3)); };
  const Real a = phi(y), b = phi(1 - y);
  const Real da = dphi(y), db = -dphi(1 - y);
  const Real dda = ddphi(y), ddb = ddphi(1 - y);
  const Real s = a + b;
  const Real num1 = da * b - a * db;
  CutoffValue out;
  out.value = a / s;
  out.d1 = num1 / (s * s);
  out.d2 = ((dda * b - a * ddb) * s - 2 * num1 * (da + db)) / (s * s * s);
  return out;
}

CutoffValue cutoff_eval(const CutoffSpec& spec, CutoffKind which, Real x) {
  spec.validate();
  const Real hi = std::log(which == CutoffKind::eta ? spec.c : spec.c1);
  const Real lo = std::log(which == CutoffKind::eta ? spec.c1 : spec.c2);
  const Real len = hi - lo;
  const CutoffValue s = smooth_step((hi - x) / len);
  return {s.value, -s.d1 / len, s.d2 / (len * len)};
}

CollarField taper_field(const CollarPtr& collar, const CutoffSpec& spec, CutoffKind which) {
  const Real u = collar->u();
  const Real log_rho = -pi / u;
  return tabulate(collar, 0, 0, [&](Real tau) {
    const Real log_r = tau / u;
    return cutoff_eval(spec, which, log_r).value * cutoff_eval(spec, which, log_rho - log_r).value;
  });
}

namespace {

CollarField half_sin2(const CollarPtr& collar, Complex amp) {
  return tabulate(collar, 0, 0, [amp](Real t) {
    const Real s = std::sin(t);
    return 0.5L * s * s * amp;
  });
}

}  // namespace

Approximants build_approximants(const Model& model, std::size_t i, std::size_t j, const CutoffSpec& cut) {
  cut.validate();
  const std::size_t m = model.m();
  if (i >= m || j >= model.n) throw Error(Errc::unknown_case, "approximants need a degenerate first index");
  for (const CollarPtr& col : model.collars)
    if (std::abs(col->params.c - cut.c) > 1e-12L)
      throw Error(Errc::config, "cutoff c must equal the collar cut");
  Approximants out;
  out.tag = i == j ? CaseTag::diagonal : (j < m ? CaseTag::degenerate : CaseTag::nondegenerate);
  const auto& tab = model.beltrami.table;
  for (std::size_t k = 0; k < m; ++k) {
    const CollarPtr& col = model.collars[k];
    Complex amp{};
    // e~ lives on collar i, and also on collar j when both directions degenerate.
    if (k == i || (out.tag == CaseTag::degenerate && k == j))
      amp = std::conj(tab.at(i, k).constant) * tab.at(j, k).constant;
    CollarField e = amp == Complex{} ? CollarField(col, 0) : mul(half_sin2(col, amp), taper_field(col, cut, CutoffKind::eta));
    out.f_tilde.push_back(apply_box1(e));
    out.e_tilde.push_back(std::move(e));
    if (out.tag == CaseTag::diagonal) {
      if (k != i) {
        out.d.emplace_back(col, 0);
        continue;
      }
      const Complex b = tab.at(i, i).constant;
      const Complex amp_d = -std::norm(b) * std::conj(b) / Real(8);
      CollarField d = tabulate(col, 0, 0, [amp_d](Real t) {
        const Real s = std::sin(t);
        return amp_d * s * s * std::cos(2 * t);
      });
      out.d.push_back(mul(d, taper_field(col, cut, CutoffKind::eta1)));
    }
  }
  return out;
}

Complex AsymptoticTarget::value(Real u, Real t_abs) const {
  return constant * std::pow(u, u_exponent) * std::pow(t_abs, t_exponent);
}

std::vector<AsymptoticTarget> target_table() {
  const Real p2 = pi * pi, p3 = p2 * pi, p4 = p2 * p2;
  const Real abs_p_integral = 2 * pi / 3 + 4 * std::sqrt(3.0L);
  return {
      {"wp-cometric-diag", 2, -3, 2, "WP cometric, degenerate diagonal entry"},
      {"wp-metric-diag", 0.5L, 3, -2, "WP metric, degenerate diagonal entry"},
      {"ricci-diag", 3 / (4 * p2), 2, -2, "Ricci metric, degenerate diagonal entry"},
      {"ricci-inverse-diag", 4 * p2 / 3, -2, 2, "inverse Ricci metric, degenerate diagonal entry"},
      {"wp-curvature-contracted", 3 / (4 * p2), 2, -2, "h^{ii} R_{iiii}"},
      {"wp-curvature-diag", 3 / (8 * p2), 5, -4, "R_{iiii}"},
      {"ef-pairing", 3 / (16 * p2), 5, -4, "int e~ f~ dv"},
      {"xi-pairing", -1 / (32 * p3), 6, -5, "int xi_i(e_ii) e_ii dv, real t"},
      {"t-pairing", 3 / (256 * p4), 7, -6, "int T(xi_i(e_ii)) conj-xi_i(e_ii) dv"},
      {"q-pairing", -3 / (64 * p4), 7, -6, "int |K0 e_ii|^2 (2 e_ii - 4 f_ii) dv"},
      {"g1-term1", 9 / (16 * p4), 4, -4, "24 h^{ii} int T(xi) conj-xi dv"},
      {"g1-term2", -9 / (16 * p4), 4, -4, "6 h^{ii} int Q_ii(e_ii) e_ii dv"},
      {"g1-term3", -3 / (16 * p4), 4, -4, "-36 tau^{ii} (h^{ii})^2 |int xi e dv|^2"},
      {"g1-term4", 9 / (16 * p4), 4, -4, "tau_ii h^{ii} R_{iiii}"},
      {"holo-sec-diag", 3 / (8 * p4), 4, -4, "Ricci-metric holomorphic sectional curvature"},
      {"a-sup", 1 / pi, 1, -1, "sup |A_i| on its collar"},
      {"f-sup", 1 / p2, 2, -2, "sup |f_ii| on its collar"},
      {"f-l2", 5 / (16 * p2), 5, -4, "int |f_ii|^2 dv with f_ii = |b|^2 sin^4 tau"},
      {"p-e-l1", abs_p_integral / (4 * pi), 3, -2, "int |P(e~_ii)| dv"},
      {"e-approx", 1, 4, -2, "sup |e_ii - e~_ii|", 0.15L, true},
      {"xi-d-residual", 1, 5, -3, "sup |xi_i(e~) - (box+1) d_i|", 0.15L, true},
      {"t-xi-d", 1, 5, -3, "sup |T xi_i(e~) - d_i|", 0.15L, true},
      {"g2", 1, 5, -4, "non-leading part of the holomorphic sectional curvature", 0.15L, true},
      {"length-derivative", 1, 2, -1, "d l / dt along real t"},
      {"log-length-sq", 1 / (4 * p2), 2, -2, "|d log l|^2"},
      {"poincare-ratio", 3, 0, 0, "tau_ii over the Poincare model"},
      {"mcmullen-ratio", 1 / Real(3), 0, 0, "McMullen combination over tau_ii"},
  };
}

const AsymptoticTarget& target(const std::string& id) {
  static const std::vector<AsymptoticTarget> table = target_table();
  for (const auto& t : table)
    if (t.id == id) return t;
  throw Error(Errc::config, "unknown asymptotic target " + id);
}

Real perturbed_target(Real u, Real t_abs, Real C) {
  const Real p4 = std::pow(pi, 4);
  const Real lead = (9 / (16 * p4) - 3 / (16 * p4) / (1 + 2 * pi * pi * C * u / 3)) * std::pow(u, 4);
  return (lead + 3 * C / (8 * pi * pi) * std::pow(u, 5)) / std::pow(t_abs, 4);
}

FitResult fit_power_law(const std::vector<std::pair<Real, Real>>& samples, Real t_exponent) {
  if (samples.size() < 4) throw Error(Errc::degenerate_fit, "power-law fit needs at least 4 samples");
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!(samples[s].first > 0)) throw Error(Errc::degenerate_fit, "sample u must be positive");
    if (s > 0 && !(samples[s].first < samples[s - 1].first))
      throw Error(Errc::degenerate_fit, "sample u must be strictly decreasing");
    if (!(std::abs(samples[s].second) > 0) || !std::isfinite(std::abs(samples[s].second)))
      throw Error(Errc::degenerate_fit, "sample values must be finite and nonzero");
  }
  const std::size_t n = samples.size();
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  Mat a(n, 3);
  Vec y(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Real u = samples[s].first;
    a(s, 0) = 1;
    a(s, 1) = std::log(u);
    a(s, 2) = u;
    // log|t|^b = -pi b / u
    y(s) = std::log(std::abs(samples[s].second)) + pi * t_exponent / u;
  }
  const Vec coef = a.colPivHouseholderQr().solve(y);
  FitResult out;
  out.constant = std::exp(coef(0));
  out.exponent = coef(1);
  out.correction = coef(2);
  const Vec fitted = a * coef;
  const Real mean = y.mean();
  Real ss_res = 0, ss_tot = 0;
  for (std::size_t s = 0; s < n; ++s) {
    out.residuals.push_back(y(s) - fitted(s));
    ss_res += std::pow(y(s) - fitted(s), 2);
    ss_tot += std::pow(y(s) - mean, 2);
  }
  out.r2 = ss_tot > 0 ? std::clamp<Real>(1 - ss_res / ss_tot, 0, 1) : 1;
  const Vec plain = a.leftCols(2).colPivHouseholderQr().solve(y);
  out.plain_exponent = plain(1);
  out.local_exponent = (y(n - 1) - y(n - 2)) / (a(n - 1, 1) - a(n - 2, 1));
  out.degenerate = out.r2 < 0.9L;
  return out;
}

LengthReport geodesic_length_derivative_check(const std::vector<Real>& ts, const std::vector<Complex>& bs) {
  LengthReport rep;
  auto length = [](Real t) { return -2 * pi * pi / std::log(t); };
  for (std::size_t s = 0; s < ts.size(); ++s) {
    const Real t = ts[s];
    LengthEntry e;
    e.t = t;
    e.u = -pi / std::log(t);
    const Complex b = s < bs.size() ? bs[s] : Complex(-e.u / (pi * t));
    const Real h = 1e-6L * t;
    // Along real t the holomorphic derivative of a radial function is half the real derivative.
    e.fd = 0.5L * (length(t + h) - length(t - h)) / (2 * h);
    e.predicted = -pi * e.u * std::conj(b);
    e.closed_form = pi * pi / (t * std::pow(std::log(t), 2));
    e.rel_err = std::abs(e.fd - e.predicted) / std::abs(e.fd);
    e.log_length_sq = std::pow(e.fd / length(t), 2);
    e.quarter_b_sq = std::norm(b) / 4;
    rep.entries.push_back(e);
  }
  return rep;
}

EquivalenceEntry equivalence_ratios(const CurvatureEngine& engine, std::size_t i) {
  const Model& model = engine.model();
  if (i >= model.m()) throw Error(Errc::config, "equivalence ratios need a degenerate direction");
  const CollarParams& p = model.collars[i]->params;
  EquivalenceEntry out;
  out.u = p.u;
  out.t_abs = p.rho;
  const Real tau = engine.ricci_metric()(i, i).real();
  const Real log_t = std::log(p.rho);
  out.poincare = tau * 4 * p.rho * p.rho * log_t * log_t;
  Real lengths = 0;
  for (std::size_t j = 0; j < model.m(); ++j) lengths += std::norm(model.beltrami.table.at(i, j).constant) / 4;
  out.mcmullen = (engine.wp()(i, i).real() + lengths) / tau;
  return out;
}

G2Entry g2_entry(const CurvatureEngine& engine) {
  G2Entry out;
  const CollarParams& p = engine.model().collars[0]->params;
  out.u = p.u;
  out.t_abs = p.rho;
  const G1Report rep = engine.g1_terms(0);
  // Case 1 is block d, Case 2 block a, Case 3 block c, Case 4 block b.
  out.cases = {rep.g2_blocks[3], rep.g2_blocks[0], rep.g2_blocks[2], rep.g2_blocks[1]};
  const ComplexMatrix& hu = engine.wp_upper();
  out.case1_term = engine.ricci_metric()(1, 0) * hu(1, 1) * engine.R(0, 1, 0, 0);
  const std::size_t n = engine.n();
  Complex acc{};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      Complex s{};
      for (const Triple& t : permutations3({0, 0, static_cast<int>(a)})) s += engine.W(t[1], t[0], 1, t[2], b);
      acc += hu(a, b) * s;
    }
  out.case3_term = acc;
  return out;
}

G2Report g2_spotcheck(const std::vector<Real>& us, Real kappa, int intervals) {
  G2Report rep;
  for (Real u : us) {
    FamilyOptions opt;
    opt.kappa = kappa;
    opt.intervals = intervals;
    const CurvatureEngine engine(pure_family({u, u}, opt));
    rep.entries.push_back(g2_entry(engine));
  }
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<std::pair<Real, Real>> samples;
    for (const auto& e : rep.entries) samples.emplace_back(e.u, std::abs(e.cases[c]));
    rep.fits[c] = fit_power_law(samples, -4);
  }
  return rep;
}

}  // namespace collarlab
