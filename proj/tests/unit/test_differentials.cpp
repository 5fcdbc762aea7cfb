#include <cmath>

#include "collarlab/differentials.hpp"
#include "doctest.h"

using namespace collarlab;

namespace {

Real rel(Real a, Real b) { return std::abs(a - b) / std::abs(b); }

// int_{tau_lo}^{tau_hi} sin^2 tau dtau.
Real sine_area(const CollarParams& p) {
  auto anti = [](Real t) { return t / 2 - std::sin(2 * t) / 4; };
  return anti(p.tau_hi()) - anti(p.tau_lo());
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;
}

}  // namespace

TEST_CASE("case tags") {
  CHECK(case_of(0, 0, 2) == CaseTag::diagonal);
  CHECK(case_of(1, 0, 2) == CaseTag::degenerate);
  CHECK(case_of(2, 0, 2) == CaseTag::nondegenerate);
  CHECK(std::string(case_name(CaseTag::nondegenerate)) == "nondegenerate");
  const CoefficientTable t(3, 2);
  CHECK(t.at(2, 1).tag == CaseTag::nondegenerate);
  CHECK(t.at(1, 1).tag == CaseTag::diagonal);
  CHECK(t.max_order() == 0);
}

TEST_CASE("pure family WP metric in closed form") {
  // h_ii = |b|^2 pi u int sin^2 and h^ii = (4 |t|^2 / (pi u^3)) int sin^2.
  for (Real u : {0.1L, 0.05L, 0.025L, 0.0125L}) {
    const Model model = pure_family({u});
    const CollarParams& p = model.collars[0]->params;
    const MetricMatrix h = wp_metric(model.beltrami, model.collars);
    const MetricMatrix hc = wp_cometric(model.quad, model.collars);
    const Real area = sine_area(p);
    CHECK(rel(h(0, 0).real(), u * u / (pi * pi * p.rho * p.rho) * pi * u * area) < 1e-10L);
    CHECK(rel(hc(0, 0).real(), 4 * p.rho * p.rho / (pi * u * u * u) * area) < 1e-10L);
    CHECK(std::abs(h(0, 0).real() * 2 * p.rho * p.rho / std::pow(u, 3) - 1) <= 3 * u);
    CHECK(std::abs(hc(0, 0).real() * std::pow(u, 3) / (2 * p.rho * p.rho) - 1) <= 3 * u);
  }
  // Desk value at u = 0.1.
  const Model model = pure_family({0.1L});
  const Real rho = model.collars[0]->params.rho;
  CHECK(std::abs(wp_cometric(model.quad, model.collars)(0, 0).real() / (rho * rho) - 1999.71L) < 0.01L);
}

TEST_CASE("Laurent data evaluates pointwise") {
  const CollarSet collars{make_collar(collar_from_u(0.1L, 0.5L, 0.3L), 512)};
  const CollarParams& p = collars[0]->params;
  QuadDiffSpec q{CoefficientTable(1, 1)};
  q.table.at(0, 0).constant = Complex(1, 0.5L);
  q.table.at(0, 0).terms = {{-1, Complex(0.3L, -0.2L)}, {2, Complex(0.7L, 0.1L)}};
  BeltramiSpec b{CoefficientTable(1, 1)};
  b.table.at(0, 0).constant = Complex(0.4L, 0.1L) * p.u / p.rho;
  b.table.at(0, 0).terms = {{1, Complex(0.2L, 0.1L)}, {-2, Complex(-0.1L, 0.3L)}};
  const CollarField phi = qdiff_field(q, collars, 0, 0);
  const CollarField a = beltrami_field(b, collars, 0, 0);
  for (std::size_t j : {20u, 256u, 490u})
    for (Real theta : {0.0L, 1.1L}) {
      const Real r = std::exp(collars[0]->grid[j] / p.u);
      const Complex z = std::polar(r, theta);
      const auto& qc = q.table.at(0, 0);
      const Complex qz = qc.constant + qc.terms.at(-1) * p.t / z + qc.terms.at(2) * z * z;
      const Complex phi_direct = -p.t / pi * qz / (z * z);
      CHECK(std::abs(phi.value(j, theta) - phi_direct) < 1e-14L * std::abs(phi_direct));
      const auto& bc = b.table.at(0, 0);
      const Complex pz = bc.terms.at(1) * z + bc.terms.at(-2) * p.rho * p.rho / (z * z);
      const Real s = std::sin(collars[0]->grid[j]);
      const Complex a_direct = z / std::conj(z) * s * s * (std::conj(pz) + std::conj(bc.constant));
      CHECK(std::abs(a.value(j, theta) - a_direct) < 1e-14L * std::abs(a_direct));
    }
}

TEST_CASE("metric matrices are Hermitian and positive definite") {
  FamilyOptions opt;
  opt.intervals = 1024;
  opt.nondegenerate = 1;
  const Model model = pure_family({0.1L, 0.05L}, opt);
  const MetricMatrix h = wp_metric(model.beltrami, model.collars, model.h_remainder);
  CHECK(h.size() == 3);
  CHECK(h.is_hermitian());
  CHECK(h.is_positive_definite());
  for (Real ev : h.eigenvalues()) CHECK(ev > 0);
  // h^{a b} h_{c b} = delta_{a c}, relative to the size of the summands (entries span ~70 decades).
  const ComplexMatrix up = h.upper();
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t c = 0; c < 3; ++c) {
      Complex acc{};
      Real mag = 0;
      for (std::size_t b = 0; b < 3; ++b) {
        acc += up(a, b) * h(c, b);
        mag += std::abs(up(a, b) * h(c, b));
      }
      CHECK(std::abs(acc - Complex(a == c ? 1 : 0)) <= 1e-15L * mag);
    }
}

TEST_CASE("metric errors") {
  const Model model = pure_family({0.1L}, {0.5L, 512});
  ComplexMatrix bad = ComplexMatrix::Zero(1, 1);
  bad(0, 0) = Complex(0, wp_metric(model.beltrami, model.collars)(0, 0).real());
  CHECK(code_of([&] { wp_metric(model.beltrami, model.collars, bad); }) == Errc::not_hermitian);
  // Two identical quadratic differentials on one collar: rank one.
  QuadDiffSpec q{CoefficientTable(2, 1)};
  q.table.at(0, 0).constant = 1;
  q.table.at(1, 0).constant = 1;
  CHECK(code_of([&] { wp_cometric(q, model.collars); }) == Errc::singular);
  const MetricMatrix soft = wp_cometric(q, model.collars, std::nullopt, false);
  CHECK(soft.singular);
  CHECK(code_of([&] { soft.upper(); }) == Errc::singular);
}

TEST_CASE("coefficient validation") {
  const Model model = pure_family({0.1L}, {0.5L, 512});
  QuadDiffSpec q = model.quad;
  q.table.at(0, 0).terms[3] = 100;  // 100 * c^3 = 12.5 > 10
  CHECK(code_of([&] { validate(q, model.collars); }) == Errc::coefficient_bound);
  BeltramiSpec b = model.beltrami;
  b.table.at(0, 0).constant *= 100;
  CHECK(code_of([&] { validate(b, model.collars); }) == Errc::coefficient_bound);
  BeltramiSpec tagged = model.beltrami;
  tagged.table.at(0, 0).tag = CaseTag::nondegenerate;
  CHECK(code_of([&] { validate(tagged, model.collars); }) == Errc::unknown_case);
  CHECK(code_of([&] { validate(model.beltrami, CollarSet{}); }) == Errc::grid_mismatch);
}

TEST_CASE("duality between quadratic and Beltrami differentials") {
  for (Real u : {0.1L, 0.05L}) {
    const Model model = pure_family({u}, {0.5L, 1024});
    const MetricMatrix h = wp_metric(model.beltrami, model.collars);
    const DualityReport rep = duality_check(model.quad, model.beltrami, h, model.collars);
    CHECK(rep.entries.size() == 1);
    CHECK(rep.max_relative <= 3 * u);
    // The exact dual closes the loop.
    const BeltramiSpec dual = dual_beltrami_spec(model.quad, h, model.collars);
    CHECK(duality_check(model.quad, dual, h, model.collars).max_relative < 1e-14L);
    // Doubling b moves the relative distance to about 1/2.
    BeltramiSpec doubled = model.beltrami;
    doubled.table.at(0, 0).constant *= 2;
    CHECK(std::abs(duality_check(model.quad, doubled, h, model.collars).max_relative - 0.5L) <= 3 * u);
  }
}

TEST_CASE("pure family layout") {
  FamilyOptions opt;
  opt.intervals = 512;
  opt.nondegenerate = 2;
  opt.kappa = 0.5L;
  const Model model = pure_family({0.1L, 0.05L}, opt);
  CHECK(model.n == 4);
  CHECK(model.m() == 2);
  CHECK(model.collars[0]->bandwidth == default_bandwidth_for(0));
  const CollarParams& p0 = model.collars[0]->params;
  const CollarParams& p1 = model.collars[1]->params;
  CHECK(std::abs(model.beltrami.table.at(1, 0).constant - Complex(0.5L * p0.u * std::pow(p1.u, 3) / p1.rho)) == 0);
  CHECK(std::abs(model.beltrami.table.at(3, 1).constant - Complex(0.5L * p1.u)) == 0);
  CHECK(model.h_remainder(2, 2) == Complex(1));
  CHECK(model.h_remainder(0, 0) == Complex(0));
  // Off-collar sup of A_i is the coupling constant itself.
  const CollarField a10 = beltrami_field(model.beltrami, model.collars, 1, 0);
  CHECK(rel(sup_norm(a10), std::abs(model.beltrami.table.at(1, 0).constant)) < 1e-15L);
}
