#include "collarlab/collar.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace collarlab {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::domain_empty: return "domain-empty";
    case Errc::invalid_cut: return "invalid-cut";
    case Errc::out_of_domain: return "out-of-domain";
    case Errc::grid_mismatch: return "grid-mismatch";
    case Errc::under_resolved: return "under-resolved";
    case Errc::coefficient_bound: return "coefficient-bound";
    case Errc::unknown_case: return "unknown-case";
    case Errc::singular: return "singular";
    case Errc::not_hermitian: return "not-hermitian";
    case Errc::not_positive_definite: return "not-positive-definite";
    case Errc::residual: return "residual";
    case Errc::unsupported: return "unsupported";
    case Errc::degenerate_fit: return "degenerate-fit";
    case Errc::config: return "config";
    case Errc::io: return "io";
  }
  return "unknown";
}

CollarParams collar_from_t(Complex t, Real c) {
  if (!(c > 0 && c < 1)) {
    std::ostringstream os;
    os << "cut c = " << static_cast<double>(c) << " outside (0,1)";
    throw Error(Errc::invalid_cut, os.str());
  }
  const Real at = std::abs(t);
  if (!(at > 0) || !(at < c * c)) {
    std::ostringstream os;
    os << "|t| = " << static_cast<double>(at) << " leaves an empty collar for c = "
       << static_cast<double>(c);
    throw Error(Errc::domain_empty, os.str());
  }
  CollarParams p;
  p.t = t;
  p.u = -pi / std::log(at);
  p.rho = at;
  p.c = c;
  return p;
}

CollarParams collar_from_u(Real u, Real c, Real arg) {
  if (!(u > 0)) throw Error(Errc::domain_empty, "collar width u must be positive");
  const Real at = std::exp(-pi / u);
  return collar_from_t(std::polar(at, arg), c);
}

Real metric_density(const CollarParams& p, Real tau) {
  if (!(tau > p.tau_lo() && tau < p.tau_hi()))
    throw Error(Errc::out_of_domain, "tau outside the collar interval");
  const Real s = std::sin(tau);
  return 0.5L * p.u * p.u * std::exp(-2 * tau / p.u) / (s * s);
}

Real geodesic_circle(const CollarParams& p) { return std::exp(-pi / (2 * p.u)); }

std::vector<Real> fornberg_weights(Real z, const std::vector<Real>& x, int order) {
  const std::size_t n = x.size();
  const int m = order;
  std::vector<std::vector<Real>> c(n, std::vector<Real>(m + 1, 0));
  Real c1 = 1, c4 = x[0] - z;
  c[0][0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    Real c2 = 1;
    const Real c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const Real c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<Real> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

namespace {

// Rows on the unit-spaced index grid 0..n: centred with `half` points each side,
// one-sided with `edge` points near the ends.
std::vector<Stencil> index_rows(std::size_t n, int half, int edge, int order) {
  std::vector<Stencil> rows(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    std::size_t first, count;
    if (i < static_cast<std::size_t>(half)) {
      first = 0;
      count = edge;
    } else if (i + half > n) {
      first = n + 1 - edge;
      count = edge;
    } else {
      first = i - half;
      count = 2 * half + 1;
    }
    std::vector<Real> x(count);
    for (std::size_t k = 0; k < count; ++k) x[k] = static_cast<Real>(first + k);
    rows[i].first = first;
    rows[i].w = fornberg_weights(static_cast<Real>(i), x, order);
  }
  return rows;
}

// Gregory end corrections of order 8, in units of 1/3628800.
constexpr std::array<Real, 8> gregory = {-744383, 1908311, -2696283, 2899075,
                                         -2134045, 1012293, -278921, 33953};

void apply(const std::vector<Stencil>& rows, const Profile& g, Profile& out) {
  out.assign(rows.size(), Complex{});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Stencil& s = rows[i];
    Complex acc{};
    for (std::size_t k = 0; k < s.w.size(); ++k) acc += s.w[k] * g[s.first + k];
    out[i] = acc;
  }
}

}  // namespace

TauGrid::TauGrid(Real tau_lo, Real tau_hi, int intervals, Real cluster)
    : intervals_(intervals), cluster_(cluster) {
  if (intervals < 32) throw Error(Errc::unsupported, "tau grid needs at least 32 intervals");
  if (!(tau_hi > tau_lo)) throw Error(Errc::domain_empty, "empty tau interval");
  if (!(cluster > 0)) throw Error(Errc::unsupported, "grid clustering must be positive");
  const std::size_t n = intervals;
  const Real h = 1.0L / n;
  const Real len = tau_hi - tau_lo;
  const Real big_k = len / (cluster + 0.5L);

  tau_.resize(n + 1);
  std::vector<Real> tp(n + 1), tpp(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const Real xi = j * h;
    const Real sp = std::sin(pi * xi);
    tau_[j] = tau_lo + big_k * (cluster * xi + xi / 2 - std::sin(2 * pi * xi) / (4 * pi));
    tp[j] = big_k * (cluster + sp * sp);
    tpp[j] = big_k * pi * std::sin(2 * pi * xi);
  }
  tau_.front() = tau_lo;
  tau_.back() = tau_hi;

  std::vector<Real> wx(n + 1, 1);
  wx.front() = wx.back() = 0.5L;
  for (std::size_t k = 0; k < gregory.size(); ++k) {
    wx[k] += gregory[k] / 3628800.0L;
    wx[n - k] += gregory[k] / 3628800.0L;
  }
  wq_.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) wq_[j] = wx[j] * h * tp[j];

  const auto x1 = index_rows(n, 3, 8, 1);
  const auto x2 = index_rows(n, 3, 8, 2);
  const auto xl = index_rows(n, 2, 6, 1);
  d1_.resize(n + 1);
  d2_.resize(n + 1);
  d1_low_.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const Real a = 1 / (h * tp[j]);
    d1_[j].first = x1[j].first;
    d1_[j].w.resize(x1[j].w.size());
    for (std::size_t k = 0; k < x1[j].w.size(); ++k) d1_[j].w[k] = x1[j].w[k] * a;

    d1_low_[j].first = xl[j].first;
    d1_low_[j].w.resize(xl[j].w.size());
    for (std::size_t k = 0; k < xl[j].w.size(); ++k) d1_low_[j].w[k] = xl[j].w[k] * a;

    // Same support as d1 by construction.
    const Real inv2 = 1 / (tp[j] * tp[j]);
    const Real ratio = tpp[j] / tp[j];
    d2_[j].first = x2[j].first;
    d2_[j].w.resize(x2[j].w.size());
    for (std::size_t k = 0; k < x2[j].w.size(); ++k)
      d2_[j].w[k] = (x2[j].w[k] / (h * h) - ratio * x1[j].w[k] / h) * inv2;
  }
}

void TauGrid::diff1(const Profile& g, Profile& out) const { apply(d1_, g, out); }
void TauGrid::diff2(const Profile& g, Profile& out) const { apply(d2_, g, out); }

Real TauGrid::integrate(const std::vector<Real>& g) const {
  Real acc = 0;
  for (std::size_t j = 0; j < wq_.size(); ++j) acc += wq_[j] * g[j];
  return acc;
}

bool TauGrid::same_as(const TauGrid& other) const {
  return this == &other ||
         (intervals_ == other.intervals_ && cluster_ == other.cluster_ &&
          tau_.front() == other.tau_.front() && tau_.back() == other.tau_.back());
}

Collar::Collar(const CollarParams& p, int intervals, int bw)
    : params(p), grid(p.tau_lo(), p.tau_hi(), intervals, p.u / 2), bandwidth(bw) {
  const std::size_t n = grid.size();
  sin2.resize(n);
  dv.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Real s = std::sin(grid[j]);
    sin2[j] = s * s;
    dv[j] = grid.weights()[j] * pi * p.u / sin2[j];
  }
}

Real Collar::rpow(int w, std::size_t j) const {
  return w == 0 ? 1.0L : std::exp(w * grid[j] / params.u);
}

CollarPtr make_collar(const CollarParams& p, int intervals, int bandwidth) {
  return std::make_shared<const Collar>(p, intervals, bandwidth);
}

namespace {

// Exponential shift so the integrand peaks at O(1) near the end that dominates.
Real moment_shift(const CollarParams& p, int k) {
  if (k > 0) return p.tau_hi();
  if (k < 0) return p.tau_lo();
  return 0;
}

// Includes the 1/u from dr = r dtau / u.
Real moment_scale(const CollarParams& p, int k) { return k == 0 ? 1 : 1 / (p.u * p.u * p.u); }

}  // namespace

Real radial_sine_moment(const Collar& collar, int k) {
  const CollarParams& p = collar.params;
  const Real shift = moment_shift(p, k);
  const auto& tau = collar.grid.nodes();
  std::vector<Real> g(tau.size());
  for (std::size_t j = 0; j < tau.size(); ++j) g[j] = std::exp(k * (tau[j] - shift) / p.u) * collar.sin2[j];
  return moment_scale(p, k) * collar.grid.integrate(g);
}

Real radial_sine_moment_exact(const CollarParams& p, int k) {
  // dr = r dtau / u, so I_k = u^{-1} int e^{k tau/u} sin^2 tau dtau.
  const Real shift = moment_shift(p, k);
  auto antiderivative = [&](Real tau) -> Real {
    if (k == 0) return tau / 2 - std::sin(2 * tau) / 4;
    const Real a = k / p.u;
    const Real e = std::exp(a * (tau - shift));
    return e / (2 * a) - e * (a * std::cos(2 * tau) + 2 * std::sin(2 * tau)) / (2 * (a * a + 4));
  };
  const Real integral = antiderivative(p.tau_hi()) - antiderivative(p.tau_lo());
  return k == 0 ? integral : integral / (p.u * p.u * p.u);
}

Real radial_sine_limit(Real c, int k) {
  if (k == 0) return pi / 2;
  const Real a = std::abs(k);
  const Real l = std::log(c);
  return 2 / (a * a * a) - 2 * l / (a * a) + l * l / a;
}

}  // namespace collarlab
