#pragma once

#include <map>
#include <optional>
#include <utility>

#include "collarlab/collar.hpp"

namespace collarlab {

// f = r^w sum_n g_n(tau) e^{i n theta}; every profile lives on the collar's grid.
class CollarField {
 public:
  CollarField() = default;
  explicit CollarField(CollarPtr collar, int weight = 0);

  const CollarPtr& collar() const { return collar_; }
  const Collar& geometry() const { return *collar_; }
  int weight() const { return weight_; }
  std::size_t size() const;

  const std::map<int, Profile>& modes() const { return modes_; }
  Profile& mode(int n);
  const Profile* find(int n) const;
  bool empty() const { return modes_.empty(); }
  int min_mode() const;
  int max_mode() const;

  bool truncated() const { return truncated_; }
  void flag_truncated() { truncated_ = true; }
  bool real_flag() const { return real_; }
  // Sets the real flag; throws unless profile(-n) = conj(profile(n)) to tol.
  void mark_real(Real tol = 1e-12L);
  bool is_real(Real tol = 1e-12L) const;

  // Value at grid node j and angle theta, r^w included.
  Complex value(std::size_t j, Real theta) const;
  // Same field with a different radial weight (profiles absorb r^{w-w'}).
  CollarField rebased(int w) const;
  // Drops identically zero profiles.
  void prune();

 private:
  CollarPtr collar_;
  int weight_ = 0;
  std::map<int, Profile> modes_;
  bool truncated_ = false;
  bool real_ = false;
};

template <class Fn>
CollarField tabulate(const CollarPtr& collar, int weight, int n, Fn&& fn) {
  CollarField f(collar, weight);
  Profile& g = f.mode(n);
  const auto& tau = collar->grid.nodes();
  for (std::size_t j = 0; j < tau.size(); ++j) g[j] = Complex(fn(tau[j]));
  return f;
}

CollarField constant_field(const CollarPtr& collar, Complex value);
CollarField zero_field(const CollarPtr& collar, int weight = 0);

void require_same_grid(const CollarField& a, const CollarField& b);

CollarField add(const CollarField& a, const CollarField& b);
CollarField sub(const CollarField& a, const CollarField& b);
CollarField mul(const CollarField& a, const CollarField& b);
CollarField conj(const CollarField& a);
CollarField scale(const CollarField& a, Complex s);

enum class Arith { add, mul, conj, scale };
CollarField field_arith(const CollarField& a, const CollarField& b, Arith op, Complex s = 1);

enum class Wirtinger { dz, dzbar };
// With check = true the field must pass the tail-mode and derivative-convergence probes.
CollarField wirtinger(const CollarField& f, Wirtinger which, bool check = false);
inline CollarField dz(const CollarField& f) { return wirtinger(f, Wirtinger::dz); }
inline CollarField dzbar(const CollarField& f) { return wirtinger(f, Wirtinger::dzbar); }

// Resolution probes used by wirtinger(check = true).
Real tail_mode_fraction(const CollarField& f);
Real derivative_disagreement(const CollarField& f);

using TauRange = std::pair<Real, Real>;
// sup |f| over grid nodes (optionally inside a tau range) and an angular sample.
Real sup_norm(const CollarField& f, std::optional<TauRange> region = std::nullopt);

// int f dv over the collar.
Complex volume_integral(const CollarField& f);
// int a b dv without forming the product.
Complex pair_integral(const CollarField& a, const CollarField& b);
// int a conj(b) dv.
Complex inner(const CollarField& a, const CollarField& b);

}  // namespace collarlab
