#pragma once

#include <memory>

#include "collarlab/types.hpp"

namespace collarlab {

// One genuine collar c^{-1} rho < r < c with rho = |t| = e^{-pi/u}.
struct CollarParams {
  Complex t;
  Real u = 0;
  Real rho = 0;
  Real c = 0;

  Real tau_lo() const { return -pi - u * std::log(c); }
  Real tau_hi() const { return u * std::log(c); }
  Real log_rho() const { return -pi / u; }
};

CollarParams collar_from_t(Complex t, Real c);
// t = e^{-pi/u} e^{i arg}.
CollarParams collar_from_u(Real u, Real c, Real arg = 0);

// lambda(r) = 1/2 u^2 r^-2 csc^2 tau, r = e^{tau/u}.
Real metric_density(const CollarParams& p, Real tau);
Real geodesic_circle(const CollarParams& p);

// Finite-difference row: out[i] = sum_k w[k] g[first + k].
struct Stencil {
  std::size_t first = 0;
  std::vector<Real> w;
};

// Fornberg weights for derivative `order` at z on nodes x.
std::vector<Real> fornberg_weights(Real z, const std::vector<Real>& x, int order);

// Mapped uniform grid: tau(xi) = a + K (eps xi + xi/2 - sin(2 pi xi)/(4 pi)), xi in [0,1].
// Endpoints are nodes; spacing shrinks by a factor ~eps toward both ends.
class TauGrid {
 public:
  TauGrid(Real tau_lo, Real tau_hi, int intervals, Real cluster);

  std::size_t size() const { return tau_.size(); }
  int intervals() const { return intervals_; }
  Real lo() const { return tau_.front(); }
  Real hi() const { return tau_.back(); }
  const std::vector<Real>& nodes() const { return tau_; }
  Real operator[](std::size_t j) const { return tau_[j]; }
  // Quadrature weights for dtau (trapezoid with Gregory end corrections in xi).
  const std::vector<Real>& weights() const { return wq_; }

  // Rows of d/dtau and d^2/dtau^2 (chain rule folded in).
  const std::vector<Stencil>& d1() const { return d1_; }
  const std::vector<Stencil>& d2() const { return d2_; }
  // Fourth-order d/dtau used as a resolution probe.
  const std::vector<Stencil>& d1_low() const { return d1_low_; }

  void diff1(const Profile& g, Profile& out) const;
  void diff2(const Profile& g, Profile& out) const;

  Real integrate(const std::vector<Real>& g) const;

  bool same_as(const TauGrid& other) const;

 private:
  int intervals_;
  Real cluster_;
  std::vector<Real> tau_;
  std::vector<Real> wq_;
  std::vector<Stencil> d1_, d2_, d1_low_;
};

// Collar geometry plus the tabulated quantities shared by every field on it.
struct Collar {
  CollarParams params;
  TauGrid grid;
  int bandwidth;
  std::vector<Real> sin2;   // sin^2 tau
  std::vector<Real> dv;     // quadrature weight for dv on weight-0 mode-0 profiles

  Collar(const CollarParams& p, int intervals, int bandwidth);
  Real u() const { return params.u; }
  // r^w at node j, computed as e^{w tau/u}.
  Real rpow(int w, std::size_t j) const;
};

using CollarPtr = std::shared_ptr<const Collar>;

inline constexpr int default_intervals = 4096;
inline constexpr int default_bandwidth = 8;

CollarPtr make_collar(const CollarParams& p, int intervals = default_intervals,
                      int bandwidth = default_bandwidth);

// Radial moments of sin^2 tau over the collar, I_k = int_{rho/c}^{c} r^{k-1} sin^2 tau dr.
// Normalized: u I_0 for k = 0, I_k / (u^2 c^k) for k >= 1, I_k / (u^2 c^{-k} rho^k) for k <= -1.
Real radial_sine_moment(const Collar& collar, int k);
// Same quantity from the antiderivative.
Real radial_sine_moment_exact(const CollarParams& p, int k);
// u -> 0 limit of the normalized moment: pi/2 for k = 0, else 2/|k|^3 - 2 log c/k^2 + log^2 c/|k|.
Real radial_sine_limit(Real c, int k);

}  // namespace collarlab
