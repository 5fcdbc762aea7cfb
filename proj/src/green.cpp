#include "collarlab/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace collarlab {

BandedLU::BandedLU(std::size_t n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1), ab_(n * (2 * kl + ku + 1), 0), piv_(n, 0) {}

// Column-major band storage with room for the fill-in of partial pivoting.
Real& BandedLU::at(std::size_t i, std::size_t j) {
  return ab_[j * ld_ + (kl_ + ku_ + i - j)];
}
Real BandedLU::at(std::size_t i, std::size_t j) const {
  return ab_[j * ld_ + (kl_ + ku_ + i - j)];
}

void BandedLU::factor() {
  const std::size_t reach = kl_ + ku_;
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t lim = std::min(n_ - 1, k + kl_);
    std::size_t p = k;
    for (std::size_t r = k + 1; r <= lim; ++r)
      if (std::abs(at(r, k)) > std::abs(at(p, k))) p = r;
    if (at(p, k) == 0) throw Error(Errc::singular, "banded system is singular");
    piv_[k] = p;
    const std::size_t jmax = std::min(n_ - 1, k + reach);
    if (p != k)
      for (std::size_t j = k; j <= jmax; ++j) std::swap(at(k, j), at(p, j));
    const Real diag = at(k, k);
    for (std::size_t r = k + 1; r <= lim; ++r) {
      const Real m = at(r, k) / diag;
      at(r, k) = m;
      if (m == 0) continue;
      for (std::size_t j = k + 1; j <= jmax; ++j) at(r, j) -= m * at(k, j);
    }
  }
}

void BandedLU::solve(std::vector<Real>& b) const {
  const std::size_t reach = kl_ + ku_;
  for (std::size_t k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
    const std::size_t lim = std::min(n_ - 1, k + kl_);
    for (std::size_t r = k + 1; r <= lim; ++r) b[r] -= at(r, k) * b[k];
  }
  for (std::size_t k = n_; k-- > 0;) {
    Real acc = b[k];
    const std::size_t jmax = std::min(n_ - 1, k + reach);
    for (std::size_t j = k + 1; j <= jmax; ++j) acc -= at(k, j) * b[j];
    b[k] = acc / at(k, k);
  }
}

namespace {

constexpr int band = 6;

struct ModeOperator {
  // Row i: coefficients on the stencil support of node i.
  std::vector<Stencil> rows;
};

ModeOperator mode_operator(const Collar& col, int w, int n) {
  const TauGrid& grid = col.grid;
  const Real u = col.u();
  const Real a = 2.0L * w / u;
  const Real b = static_cast<Real>(w * w - n * n) / (u * u);
  const std::size_t size = grid.size();
  ModeOperator op;
  op.rows.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    Stencil& row = op.rows[i];
    if (i == 0 || i + 1 == size) {
      row.first = i;
      row.w = {1.0L};
      continue;
    }
    const Stencil& s1 = grid.d1()[i];
    const Stencil& s2 = grid.d2()[i];
    row.first = s2.first;
    row.w.assign(s2.w.size(), 0);
    const Real coef = -0.5L * col.sin2[i];
    for (std::size_t k = 0; k < s2.w.size(); ++k) row.w[k] = coef * (s2.w[k] + a * s1.w[k]);
    row.w[i - row.first] += coef * b + 1;
  }
  return op;
}

void apply_rows(const ModeOperator& op, const std::vector<Real>& x, std::vector<Real>& y) {
  y.assign(x.size(), 0);
  for (std::size_t i = 0; i < op.rows.size(); ++i) {
    const Stencil& s = op.rows[i];
    Real acc = 0;
    for (std::size_t k = 0; k < s.w.size(); ++k) acc += s.w[k] * x[s.first + k];
    y[i] = acc;
  }
}

}  // namespace

Real boundary_fraction(const CollarField& f) {
  const Real total = sup_norm(f);
  if (total == 0) return 0;
  const TauGrid& g = f.geometry().grid;
  const Real len = g.hi() - g.lo();
  const Real edge = std::max(sup_norm(f, TauRange{g.lo(), g.lo() + 0.1L * len}),
                             sup_norm(f, TauRange{g.hi() - 0.1L * len, g.hi()}));
  return edge / total;
}

Real interior_residual(const CollarField& g, const CollarField& f) {
  const CollarField r = sub(apply_box1(g), f.rebased(g.weight()));
  const Real scale_ref = sup_norm(f);
  if (scale_ref == 0) return sup_norm(r);
  const TauGrid& grid = g.geometry().grid;
  // Nodes 0 and N carry the boundary condition, not the equation.
  const Real inner_lo = grid[1], inner_hi = grid[grid.size() - 2];
  return sup_norm(r, TauRange{inner_lo, inner_hi}) / scale_ref;
}

CollarField solve_T(const CollarField& f, const SolverConfig& cfg, SolveDiagnostics* diag) {
  if (cfg.tolerance > 1e-10L) throw Error(Errc::config, "solver tolerance must be <= 1e-10");
  const Collar& col = f.geometry();
  if (cfg.intervals != 0 && cfg.intervals != col.grid.intervals())
    throw Error(Errc::grid_mismatch, "solver resolution differs from the input grid");
  const int w = f.weight();
  CollarField g(f.collar(), w);
  if (f.truncated()) g.flag_truncated();
  const std::size_t size = col.grid.size();
  std::vector<Real> re(size), im(size), y;
  for (const auto& [n, fn] : f.modes()) {
    if (std::abs(n) > cfg.mode_cutoff) throw Error(Errc::unsupported, "mode beyond the solver cutoff");
    const ModeOperator op = mode_operator(col, w, n);
    BandedLU lu(size, band, band);
    for (std::size_t i = 0; i < size; ++i) {
      const Stencil& s = op.rows[i];
      for (std::size_t k = 0; k < s.w.size(); ++k) lu.at(i, s.first + k) += s.w[k];
    }
    lu.factor();
    Profile& out = g.mode(n);
    for (int part = 0; part < 2; ++part) {
      std::vector<Real> rhs(size);
      for (std::size_t j = 0; j < size; ++j) rhs[j] = part == 0 ? fn[j].real() : fn[j].imag();
      rhs.front() = rhs.back() = 0;
      std::vector<Real> x = rhs;
      lu.solve(x);
      Real xmax = 0;
      for (Real v : x) xmax = std::max(xmax, std::abs(v));
      for (int iter = 0; iter < 3; ++iter) {
        apply_rows(op, x, y);
        Real rmax = 0;
        for (std::size_t j = 0; j < size; ++j) {
          y[j] = rhs[j] - y[j];
          rmax = std::max(rmax, std::abs(y[j]));
        }
        if (rmax == 0) break;
        lu.solve(y);
        Real dmax = 0;
        for (std::size_t j = 0; j < size; ++j) {
          x[j] += y[j];
          dmax = std::max(dmax, std::abs(y[j]));
        }
        if (dmax <= cfg.tolerance * std::max<Real>(xmax, 1e-300L)) break;
      }
      (part == 0 ? re : im) = x;
    }
    for (std::size_t j = 0; j < size; ++j) out[j] = Complex(re[j], im[j]);
  }
  g.prune();
  SolveDiagnostics local;
  local.modes = static_cast<int>(f.modes().size());
  local.residual = interior_residual(g, f);
  if (cfg.check_support) local.support_warning = boundary_fraction(f) > 1e-6L;
  if (diag) *diag = local;
  if (local.residual > cfg.residual_tol) {
    std::ostringstream os;
    os << "Green solve residual " << static_cast<double>(local.residual) << " exceeds tolerance";
    throw Error(Errc::residual, os.str());
  }
  return g;
}

Real unit_uniform(std::mt19937_64& rng) { return static_cast<Real>(rng() >> 11) * 0x1.0p-53L; }

CollarField random_supported_field(const CollarPtr& collar, std::mt19937_64& rng, int max_mode) {
  const Real lo = collar->grid.lo(), hi = collar->grid.hi();
  const Real len = hi - lo;
  CollarField f(collar, 0);
  for (int n = 0; n <= max_mode; ++n) {
    const Real width = len * (0.15L + 0.2L * unit_uniform(rng));
    const Real centre = lo + 0.15L * len + width + (0.7L * len - 2 * width) * unit_uniform(rng);
    Complex amp(2 * unit_uniform(rng) - 1, n == 0 ? 0 : 2 * unit_uniform(rng) - 1);
    Profile& g = f.mode(n);
    const auto& tau = collar->grid.nodes();
    for (std::size_t j = 0; j < tau.size(); ++j) {
      const Real x = (tau[j] - centre) / width;
      g[j] = std::abs(x) < 1 ? amp * std::exp(1 - 1 / (1 - x * x)) : Complex{};
    }
    if (n > 0) {
      Profile& m = f.mode(-n);
      for (std::size_t j = 0; j < g.size(); ++j) m[j] = std::conj(g[j]);
    }
  }
  f.mark_real();
  return f;
}

SpectralReport spectral_check(const CollarPtr& collar, std::size_t samples, std::uint64_t seed, Real slack,
                              const SolverConfig& cfg) {
  std::mt19937_64 rng(seed);
  SpectralReport rep;
  rep.samples = samples;
  rep.worst_lower = rep.worst_upper = -std::numeric_limits<Real>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const CollarField f = random_supported_field(collar, rng);
    const CollarField tf = solve_T(f, cfg);
    const Real norm_tf = inner(tf, tf).real();
    const Real mixed = inner(tf, f).real();
    const Real norm_f = inner(f, f).real();
    const Real lower = (norm_tf - mixed) / norm_f;
    const Real upper = (mixed - norm_f) / norm_f;
    rep.worst_lower = std::max(rep.worst_lower, lower);
    rep.worst_upper = std::max(rep.worst_upper, upper);
    if (lower > slack || upper > slack) ++rep.violations;
  }
  return rep;
}

Real self_adjoint_defect(const CollarField& f, const CollarField& h, const SolverConfig& cfg) {
  const Complex left = inner(solve_T(f, cfg), h);
  const Complex right = inner(f, solve_T(h, cfg));
  const Real ref = std::max(std::abs(left), std::abs(right));
  return ref == 0 ? 0 : std::abs(left - right) / ref;
}

Real boundary_sensitivity(const CollarParams& p, const FieldBuilder& f, const FieldBuilder& h, int intervals,
                          Real factor) {
  SolverConfig cfg;
  cfg.check_support = false;
  auto pairing = [&](const CollarParams& q) {
    const CollarPtr col = make_collar(q, intervals);
    return inner(solve_T(f(col), cfg), h(col));
  };
  CollarParams narrow = p;
  narrow.c = p.c * factor;
  const Complex wide_value = pairing(p);
  const Complex narrow_value = pairing(narrow);
  return std::abs(wide_value - narrow_value) / std::abs(wide_value);
}

}  // namespace collarlab
