#include <cmath>
#include <random>

#include "collarlab/asymptotics.hpp"
#include "doctest.h"

using namespace collarlab;

namespace {

Real rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

const Real p4 = std::pow(pi, 4);

}  // namespace

TEST_CASE("leading G1 terms on the pure family") {
  const Real u = 0.025L;
  const CurvatureEngine engine(pure_family({u}));
  const G1Report g = engine.g1_terms(0);
  const Real scale = std::pow(u, 4) / std::pow(g.t_abs, 4);
  const Real expected[4] = {9, -9, -3, 9};
  for (int k = 0; k < 4; ++k) {
    CHECK(rel(g.terms[k], expected[k] / (16 * p4) * scale) < 1e-3L);
    CHECK(g.rel_err[k] < 1e-3L);
  }
  CHECK(rel(g.sum, 3 / (8 * p4) * scale) < 1e-3L);
  // Single collar: nothing outside the leading index.
  CHECK(g.g2 == Complex{});
  // The Maass-form reduction of the Q pairing reproduces the second term.
  CHECK(rel(g.term2_reduced, g.terms[1]) < 1e-4L);
  // Holomorphic sectional curvature sums the four Ricci blocks.
  CHECK(rel(engine.ricci_curvature(0, 0, 0, 0).total(), g.sum) < 1e-12L);
}

TEST_CASE("G1 relative errors shrink with u") {
  Real prev = 1;
  for (Real u : {0.1L, 0.05L, 0.025L}) {
    const Real err = CurvatureEngine(pure_family({u}, {0.5L, 2048})).g1_terms(0).sum_rel_err;
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("closed-form sizes on one collar") {
  const Real u = 0.05L;
  const CurvatureEngine engine(pure_family({u}));
  const Real t = engine.model().collars[0]->params.rho;
  // f_ii = |A_i|^2 peaks at |b|^2.
  CHECK(rel(sup_norm(engine.f(0, 0, 0)), u * u / (pi * pi * t * t)) < 1e-15L);
  CHECK(rel(sup_norm(engine.A(0, 0)), u / (pi * t)) < 1e-15L);
  CHECK(rel(engine.wp()(0, 0), target("wp-metric-diag").value(u, t)) < 3 * u);
  CHECK(rel(engine.ricci_metric()(0, 0), target("ricci-diag").value(u, t)) < 3 * u);
  CHECK(rel(engine.wp_curvature()(0, 0, 0, 0), target("wp-curvature-diag").value(u, t)) < 3 * u);
  CHECK(rel(engine.V(0, 0, 0, 0, 0, 0), target("t-pairing").value(u, t)) < 3 * u);
  CHECK(rel(engine.W(0, 0, 0, 0, 0), target("xi-pairing").value(u, t)) < 3 * u);
}

TEST_CASE("tensor symmetries on a mixed model") {
  FamilyOptions opt;
  opt.intervals = 2048;
  opt.nondegenerate = 1;
  const CurvatureEngine engine(pure_family({0.1L, 0.08L}, opt));
  CHECK(engine.n() == 3);
  CHECK(engine.wp_curvature().hermitian_defect() < 1e-10L);
  CHECK(engine.wp_curvature().pair_symmetry_defect() < 1e-10L);
  const CurvatureTensor ric = engine.ricci_tensor();
  CHECK(ric.kind() == TensorKind::ricci);
  CHECK(ric.hermitian_defect() < 1e-6L);
  CHECK(engine.ricci_metric().is_positive_definite());
  CHECK(engine.ricci_metric().is_hermitian(1e-10L));
}

TEST_CASE("Ricci metric is the contracted WP curvature") {
  FamilyOptions opt;
  opt.intervals = 1024;
  opt.nondegenerate = 1;
  const CurvatureEngine engine(pure_family({0.1L, 0.08L}, opt));
  const ComplexMatrix& hu = engine.wp_upper();
  const std::size_t n = engine.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc{};
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) acc += hu(a, b) * engine.R(i, j, a, b);
      const Complex tau = engine.ricci_metric()(i, j) - engine.model().tau_remainder(i, j);
      CHECK(std::abs(tau - acc) <= 1e-12L * std::abs(engine.ricci_metric()(i, i)) + 1e-12L * std::abs(acc));
    }
}

TEST_CASE("Q pairing identity on compactly supported fields") {
  std::mt19937_64 rng(31);
  const CollarPtr c = make_collar(collar_from_u(0.1L, 0.5L), 4096, 12);
  for (int s = 0; s < 4; ++s) {
    const CollarField e_kl = random_supported_field(c, rng, 1);
    const CollarField e_ij = random_supported_field(c, rng, 1);
    const CollarField e_ab = random_supported_field(c, rng, 1);
    const QPairing q = q_pairing_identity(e_kl, e_ij, e_ab);
    CHECK(rel(q.direct, q.reduced) < 1e-6L);
  }
}

TEST_CASE("perturbed Ricci metric") {
  const Real u = 0.025L;
  const CurvatureEngine engine(pure_family({u}));
  const Real t = engine.model().collars[0]->params.rho;
  for (Real C : {1.0L, 10.0L}) {
    const MetricMatrix pm = engine.perturbed_metric(C);
    CHECK(pm.kind == MetricKind::perturbed_ricci);
    const Real inv_p = pm.upper()(0, 0).real(), inv = engine.ricci_upper()(0, 0).real();
    CHECK(inv_p > 0);
    CHECK(inv_p < inv);
    const RicciBlocks p = engine.perturbed_curvature(0, 0, 0, 0, C);
    CHECK(rel(p.total(), perturbed_target(u, t, C)) < 1e-3L);
    CHECK(rel(p.perturbation, C * engine.R(0, 0, 0, 0)) < 1e-15L);
    CHECK(rel(engine.perturbed_g1_terms(0, C).sum, p.total()) < 1e-12L);
    CHECK(std::abs(perturbed_determinant_ratio(engine, C) - 1) < 1e-3L);
  }
  // C = 0 recovers the Ricci curvature.
  CHECK(rel(engine.perturbed_curvature(0, 0, 0, 0, 0).total(), engine.ricci_curvature(0, 0, 0, 0).total()) < 1e-15L);
}

TEST_CASE("perturbed determinant with nondegenerate directions") {
  FamilyOptions opt;
  opt.intervals = 1024;
  opt.nondegenerate = 2;
  const CurvatureEngine engine(pure_family({0.05L}, opt));
  CHECK(std::abs(perturbed_determinant_ratio(engine, 1) - 1) < 0.1L);
}

TEST_CASE("G2 remainder on two collars splits into the four blocks") {
  FamilyOptions opt;
  opt.intervals = 1024;
  const CurvatureEngine engine(pure_family({0.05L, 0.05L}, opt));
  const G1Report g = engine.g1_terms(0);
  Complex blocks{};
  for (const Complex& b : g.g2_blocks) blocks += b;
  CHECK(rel(blocks, g.g2) < 1e-12L);
  CHECK(rel(g.sum + g.g2, engine.ricci_curvature(0, 0, 0, 0).total()) < 1e-12L);
  CHECK(std::abs(g.g2) < 1e-6L * std::abs(g.sum));
}
