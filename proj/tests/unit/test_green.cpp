#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "collarlab/green.hpp"
#include "doctest.h"

using namespace collarlab;

namespace {

CollarPtr collar_at(Real u, int n = 2048) { return make_collar(collar_from_u(u, 0.5L), n); }

}  // namespace

TEST_CASE("banded LU matches a dense solve") {
  std::mt19937_64 rng(1);
  const std::size_t n = 40;
  const int kl = 3, ku = 2;
  BandedLU lu(n, kl, ku);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > kl ? i - kl : 0); j <= std::min(n - 1, i + ku); ++j) {
      // Weak diagonal so pivoting is exercised.
      const double v = 2 * static_cast<double>(unit_uniform(rng)) - 1;
      lu.at(i, j) = v;
      dense(i, j) = v;
    }
  Eigen::VectorXd b(n);
  std::vector<Real> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b(i) = std::sin(1.0 + i);
  lu.factor();
  lu.solve(x);
  const Eigen::VectorXd ref = dense.fullPivLu().solve(b);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(static_cast<double>(x[i]) - ref(i)) < 1e-9 * (1 + std::abs(ref(i))));
}

TEST_CASE("banded LU reports singular systems") {
  BandedLU lu(4, 1, 1);
  lu.at(0, 0) = 1;
  lu.at(1, 1) = 1;
  lu.at(3, 3) = 1;
  CHECK_THROWS_AS(lu.factor(), Error);
}

TEST_CASE("Green operator inverts a manufactured solution") {
  // g = sin^2(pi s) e^{i theta} with s the normalized tau coordinate; f = (box + 1) g in closed form.
  for (Real u : {0.1L, 0.025L}) {
    const CollarPtr c = collar_at(u);
    const Real lo = c->grid.lo(), len = c->grid.hi() - lo, k = pi / len;
    auto g_exact = [&](Real t) { return std::pow(std::sin(k * (t - lo)), 2); };
    auto g2 = [&](Real t) { return 2 * k * k * std::cos(2 * k * (t - lo)); };
    const CollarField g = tabulate(c, 0, 1, g_exact);
    const CollarField f = tabulate(c, 0, 1, [&](Real t) {
      const Real s = std::sin(t);
      return -0.5L * s * s * (g2(t) - g_exact(t) / (u * u)) + g_exact(t);
    });
    SolverConfig cfg;
    cfg.check_support = false;
    SolveDiagnostics diag;
    const CollarField sol = solve_T(f, cfg, &diag);
    CHECK(diag.residual < 1e-10L);
    CHECK(diag.modes == 1);
    CHECK(sup_norm(sub(sol, g)) < 1e-9L);
    CHECK(std::abs(sol.find(1)->front()) < 1e-20L);
    CHECK(std::abs(sol.find(1)->back()) < 1e-20L);
  }
}

TEST_CASE("Green operator spectral inequalities") {
  for (Real u : {0.1L, 0.05L}) {
    const SpectralReport rep = spectral_check(collar_at(u, 1024), 25, 2024);
    CHECK(rep.samples == 25);
    CHECK(rep.violations == 0);
    CHECK(rep.worst_lower <= 1e-10L);
    CHECK(rep.worst_upper <= 1e-10L);
  }
}

TEST_CASE("Green operator is self-adjoint on compact fields") {
  std::mt19937_64 rng(77);
  const CollarPtr c = collar_at(0.05L);
  for (int s = 0; s < 4; ++s) {
    const CollarField f = random_supported_field(c, rng);
    const CollarField h = random_supported_field(c, rng);
    CHECK(self_adjoint_defect(f, h) < 1e-8L);
  }
}

TEST_CASE("Green operator on the zero field") {
  const CollarPtr c = collar_at(0.1L, 512);
  CHECK(solve_T(zero_field(c)).empty());
  CHECK(interior_residual(zero_field(c), zero_field(c)) == 0);
}

TEST_CASE("solver configuration") {
  const CollarPtr c = collar_at(0.1L, 512);
  const CollarField f = tabulate(c, 0, 0, [](Real t) { return std::sin(t); });
  SolverConfig loose;
  loose.tolerance = 1e-8L;
  CHECK_THROWS_AS(solve_T(f, loose), Error);
  SolverConfig other;
  other.intervals = 1024;
  try {
    solve_T(f, other);
    FAIL("expected grid mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::grid_mismatch);
  }
  SolverConfig narrow;
  narrow.mode_cutoff = 1;
  CHECK_THROWS_AS(solve_T(tabulate(c, 0, 3, [](Real t) { return std::sin(t); }), narrow), Error);
}

TEST_CASE("support warning") {
  std::mt19937_64 rng(4);
  const CollarPtr c = collar_at(0.1L, 1024);
  SolveDiagnostics diag;
  solve_T(random_supported_field(c, rng), {}, &diag);
  CHECK_FALSE(diag.support_warning);
  solve_T(tabulate(c, 0, 0, [](Real t) { return std::sin(t); }), {}, &diag);
  CHECK(diag.support_warning);
  CHECK(boundary_fraction(tabulate(c, 0, 0, [](Real) { return 1.0L; })) == 1);
}

TEST_CASE("seeded randomness is platform independent") {
  std::mt19937_64 a(42), b(42);
  const Real x = unit_uniform(a);
  CHECK(x == static_cast<Real>(b() >> 11) / 9007199254740992.0L);
  CHECK(x >= 0);
  CHECK(x < 1);
  std::mt19937_64 r1(8), r2(8);
  const CollarPtr c = collar_at(0.1L, 256);
  const CollarField f1 = random_supported_field(c, r1), f2 = random_supported_field(c, r2);
  CHECK(sup_norm(sub(f1, f2)) == 0);
  CHECK(f1.is_real());
  CHECK(boundary_fraction(f1) == 0);
}

TEST_CASE("compactly supported data barely feels the collar ends") {
  const CollarParams p = collar_from_u(0.1L, 0.5L);
  const FieldBuilder bump = [](const CollarPtr& col) {
    return tabulate(col, 0, 0, [](Real t) {
      const Real x = (t + pi / 2) / 0.8L;
      return std::abs(x) < 1 ? std::exp(1 - 1 / (1 - x * x)) : 0.0L;
    });
  };
  CHECK(boundary_sensitivity(p, bump, bump, 1024) < 1e-3L);
}
