#include <cmath>
#include <set>

#include "collarlab/asymptotics.hpp"
#include "doctest.h"

using namespace collarlab;

namespace {

Real rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;
}

}  // namespace

TEST_CASE("smooth step") {
  CHECK(smooth_step(0).value == 0);
  CHECK(smooth_step(1).value == 1);
  CHECK(smooth_step(-3).d1 == 0);
  CHECK(std::abs(smooth_step(0.5L).value - 0.5L) < 1e-18L);
  // Odd symmetry about y = 1/2.
  CHECK(std::abs(smooth_step(0.3L).value + smooth_step(0.7L).value - 1) < 1e-18L);
  // Derivatives against central differences.
  const Real h = 1e-5L;
  for (Real y : {0.1L, 0.35L, 0.5L, 0.8L}) {
    const CutoffValue s = smooth_step(y);
    CHECK(std::abs((smooth_step(y + h).value - smooth_step(y - h).value) / (2 * h) - s.d1) < 1e-8L);
    CHECK(std::abs((smooth_step(y + h).d1 - smooth_step(y - h).d1) / (2 * h) - s.d2) < 1e-7L);
  }
}

TEST_CASE("cutoff functions") {
  const CutoffSpec spec;
  CHECK(cutoff_eval(spec, CutoffKind::eta, std::log(0.3L)).value == 1);
  CHECK(cutoff_eval(spec, CutoffKind::eta, std::log(0.6L)).value == 0);
  CHECK(cutoff_eval(spec, CutoffKind::eta1, std::log(0.2L)).value == 1);
  CHECK(cutoff_eval(spec, CutoffKind::eta1, std::log(0.4L)).value == 0);
  const Real mid = 0.5L * (std::log(0.35L) + std::log(0.5L));
  CHECK(std::abs(cutoff_eval(spec, CutoffKind::eta, mid).value - 0.5L) < 1e-15L);
  CHECK(cutoff_eval(spec, CutoffKind::eta, mid).d1 < 0);
  const Real h = 1e-5L;
  const CutoffValue v = cutoff_eval(spec, CutoffKind::eta1, -1.2L);
  CHECK(std::abs((cutoff_eval(spec, CutoffKind::eta1, -1.2L + h).value -
                  cutoff_eval(spec, CutoffKind::eta1, -1.2L - h).value) / (2 * h) - v.d1) < 1e-7L);
  CHECK_THROWS_AS(cutoff_eval({0.5L, 0.2L, 0.3L}, CutoffKind::eta, 0), Error);
}

TEST_CASE("diagonal approximant f~ against the chain rule") {
  const Real u = 0.05L;
  const Model model = pure_family({u}, {0.5L, 4096});
  const Approximants ap = build_approximants(model, 0, 0);
  CHECK(ap.tag == CaseTag::diagonal);
  const Complex b = model.beltrami.table.at(0, 0).constant;
  const CutoffSpec cut;
  const CollarPtr& c = model.collars[0];
  Real worst = 0, scale_ref = 0;
  for (std::size_t j = 0; j < c->grid.size(); ++j) {
    const Real t = c->grid[j];
    const CutoffValue a = cutoff_eval(cut, CutoffKind::eta, t / u);
    const CutoffValue z = cutoff_eval(cut, CutoffKind::eta, -(pi + t) / u);
    const Real e = a.value * z.value;
    const Real e1 = (a.d1 * z.value - a.value * z.d1) / u;
    const Real e2 = (a.d2 * z.value - 2 * a.d1 * z.d1 + a.value * z.d2) / (u * u);
    const Real s = std::sin(t) * std::sin(t), s1 = std::sin(2 * t), s2 = 2 * std::cos(2 * t);
    const Real amp = 0.5L * std::norm(b);
    const Real g = amp * s * e;
    const Real g2 = amp * (s2 * e + 2 * s1 * e1 + s * e2);
    const Real f = -0.5L * s * g2 + g;
    worst = std::max(worst, std::abs(ap.f_tilde[0].value(j, 0) - f));
    scale_ref = std::max(scale_ref, std::abs(f));
    CHECK(std::abs(ap.e_tilde[0].value(j, 0) - g) <= 1e-15L * amp);
  }
  CHECK(worst / scale_ref < 1e-7L);
  // d_i on the plateau of eta_1.
  const std::size_t mid = c->grid.intervals() / 2;
  const Real t = c->grid[mid];
  const Complex d_exact = -std::norm(b) * std::conj(b) / Real(8) * std::sin(t) * std::sin(t) * std::cos(2 * t);
  CHECK(rel(ap.d[0].value(mid, 0), d_exact) < 1e-15L);
}

TEST_CASE("approximant cases and supports") {
  FamilyOptions opt;
  opt.intervals = 512;
  opt.nondegenerate = 1;
  const Model model = pure_family({0.1L, 0.08L}, opt);
  const Approximants deg = build_approximants(model, 0, 1);
  CHECK(deg.tag == CaseTag::degenerate);
  CHECK(sup_norm(deg.e_tilde[0]) > 0);
  CHECK(sup_norm(deg.e_tilde[1]) > 0);
  CHECK(deg.d.empty());
  const Approximants nd = build_approximants(model, 1, 2);
  CHECK(nd.tag == CaseTag::nondegenerate);
  CHECK(sup_norm(nd.e_tilde[0]) == 0);
  CHECK(sup_norm(nd.e_tilde[1]) > 0);
  CHECK(code_of([&] { build_approximants(model, 2, 2); }) == Errc::unknown_case);
  CHECK(code_of([&] { build_approximants(model, 0, 0, {0.4L, 0.3L, 0.2L}); }) == Errc::config);
  // Tapers vanish at both collar ends.
  const CollarField tap = taper_field(model.collars[0], {}, CutoffKind::eta);
  CHECK(tap.value(0, 0) == Complex{});
  CHECK(tap.value(model.collars[0]->grid.intervals(), 0) == Complex{});
  CHECK(tap.value(model.collars[0]->grid.intervals() / 2, 0) == Complex(1));
}

TEST_CASE("target table") {
  const auto table = target_table();
  std::set<std::string> ids;
  for (const auto& t : table) ids.insert(t.id);
  CHECK(ids.size() == table.size());
  // Sum of the four G1 terms.
  Complex sum{};
  for (const char* id : {"g1-term1", "g1-term2", "g1-term3", "g1-term4"}) sum += target(id).constant;
  CHECK(rel(sum, target("holo-sec-diag").constant) < 1e-15L);
  // Metric and cometric are reciprocal.
  CHECK(rel(target("wp-metric-diag").constant * target("wp-cometric-diag").constant, 1) < 1e-18L);
  CHECK(rel(target("ricci-diag").constant * target("ricci-inverse-diag").constant, 1) < 1e-18L);
  CHECK(target("e-approx").order_only);
  CHECK(rel(target("ricci-diag").value(0.1L, 1e-3L), 3 / (4 * pi * pi) * 0.01L / 1e-6L) < 1e-15L);
  CHECK_THROWS_AS(target("nope"), Error);
  // C = 0 gives the Ricci value.
  CHECK(rel(perturbed_target(0.05L, 1e-20L, 0), holo_target(0.05L, 1e-20L)) < 1e-15L);
}

TEST_CASE("f norms against the sin^4 profile") {
  const Real u = 0.05L;
  const CurvatureEngine engine(pure_family({u}));
  const Real b2 = std::norm(engine.model().beltrami.table.at(0, 0).constant);
  const Real t_abs = std::exp(-pi / u);
  const CollarField& f = engine.f(0, 0, 0);
  // int_{-pi}^{0} sin^6 = 5 pi / 16; the collar truncation costs O(c^6 u) at most.
  const Real oracle = b2 * b2 * pi * u * 5 * pi / 16;
  CHECK(rel(inner(f, f), oracle) < 1e-4L);
  CHECK(rel(inner(f, f), target("f-l2").value(u, t_abs)) < 1e-4L);
  CHECK(rel(sup_norm(f), b2) < 1e-12L);
}

TEST_CASE("power-law fits") {
  std::vector<std::pair<Real, Real>> s;
  for (Real u : {0.1L, 0.05L, 0.025L, 0.0125L}) s.emplace_back(u, std::pow(u, 3) * (1 + u));
  const FitResult f = fit_power_law(s);
  CHECK(std::abs(f.exponent - 3) < 0.1L);
  CHECK(std::abs(f.constant - 1) < 0.05L);
  CHECK(f.r2 > 0.999L);
  CHECK_FALSE(f.degenerate);

  // |t| powers are divided out exactly.
  std::vector<std::pair<Real, Real>> tp;
  for (Real u : {0.1L, 0.05L, 0.025L, 0.0125L}) tp.emplace_back(u, 2 * std::pow(u, 5) * std::exp(4 * pi / u));
  const FitResult g = fit_power_law(tp, -4);
  CHECK(std::abs(g.exponent - 5) < 1e-9L);
  CHECK(std::abs(g.constant - 2) < 1e-9L);

  std::vector<std::pair<Real, Real>> zero = {{0.1L, 0}, {0.05L, 0}, {0.025L, 0}, {0.0125L, 0}};
  CHECK(code_of([&] { fit_power_law(zero); }) == Errc::degenerate_fit);
  CHECK(code_of([&] { fit_power_law({{0.1L, 1}, {0.05L, 1}, {0.025L, 1}}); }) == Errc::degenerate_fit);
  CHECK(code_of([&] { fit_power_law({{0.1L, 1}, {0.2L, 1}, {0.025L, 1}, {0.01L, 1}}); }) == Errc::degenerate_fit);

  // Data that ignores u fits poorly.
  std::vector<std::pair<Real, Real>> noise = {{0.1L, 1}, {0.08L, 5}, {0.06L, 1}, {0.04L, 5}, {0.02L, 1}};
  CHECK(fit_power_law(noise).degenerate);
}

TEST_CASE("geodesic length derivative") {
  const LengthReport rep = geodesic_length_derivative_check({std::exp(-10.0L), std::exp(-40.0L), std::exp(-160.0L)});
  REQUIRE(rep.entries.size() == 3);
  const LengthEntry& e = rep.entries[0];
  // u^2 / t with u = pi / 10.
  CHECK(std::abs(std::abs(e.predicted) - 2173.9L) < 0.1L);
  CHECK(rel(std::abs(e.predicted), e.closed_form) < 1e-15L);
  for (const LengthEntry& x : rep.entries) {
    CHECK(x.rel_err <= 3 * x.u);
    CHECK(x.rel_err < 1e-8L);
    CHECK(rel(x.log_length_sq, x.quarter_b_sq) < 1e-8L);
  }
  // A different b moves the prediction proportionally.
  const LengthReport off = geodesic_length_derivative_check({std::exp(-10.0L)}, {Complex(0, 1)});
  CHECK(rel(off.entries[0].predicted, Complex(0, -1) * -pi * (pi / 10)) < 1e-15L);
}

TEST_CASE("equivalence ratios") {
  for (Real u : {0.05L, 0.025L}) {
    const CurvatureEngine engine(pure_family({u}, {0.5L, 2048}));
    const EquivalenceEntry e = equivalence_ratios(engine);
    CHECK(std::abs(e.poincare - 3) < 3 * u);
    // Leading order of the combination: 1/3 + 2 pi^2 u / 3.
    CHECK(std::abs(e.mcmullen - (1 / Real(3) + 2 * pi * pi * u / 3)) < 0.01L);
  }
  FamilyOptions opt;
  opt.intervals = 512;
  opt.nondegenerate = 1;
  CHECK_THROWS_AS(equivalence_ratios(CurvatureEngine(pure_family({0.1L}, opt)), 1), Error);
}

TEST_CASE("G2 spot check on two collars") {
  const G2Report rep = g2_spotcheck({0.1L, 0.08L, 0.06L, 0.05L}, 1, 1024);
  REQUIRE(rep.entries.size() == 4);
  for (const FitResult& f : rep.fits) CHECK(f.exponent >= 4.7L);
  // Zero coupling removes every representative.
  const G2Entry z = g2_entry(CurvatureEngine(pure_family({0.1L, 0.1L}, {0.5L, 512, 0, 0})));
  for (const Complex& c : z.cases) CHECK(c == Complex{});
  CHECK(z.case1_term == Complex{});
  CHECK(z.case3_term == Complex{});
}
