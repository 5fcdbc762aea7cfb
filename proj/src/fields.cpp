#include "collarlab/fields.hpp"

#include <algorithm>
#include <cmath>

namespace collarlab {

CollarField::CollarField(CollarPtr collar, int weight) : collar_(std::move(collar)), weight_(weight) {}

std::size_t CollarField::size() const { return collar_ ? collar_->grid.size() : 0; }

Profile& CollarField::mode(int n) {
  auto it = modes_.find(n);
  if (it == modes_.end()) it = modes_.emplace(n, Profile(size(), Complex{})).first;
  return it->second;
}

const Profile* CollarField::find(int n) const {
  auto it = modes_.find(n);
  return it == modes_.end() ? nullptr : &it->second;
}

int CollarField::min_mode() const { return modes_.empty() ? 0 : modes_.begin()->first; }
int CollarField::max_mode() const { return modes_.empty() ? 0 : modes_.rbegin()->first; }

bool CollarField::is_real(Real tol) const {
  Real scale_ref = 0;
  for (const auto& [n, g] : modes_)
    for (const auto& v : g) scale_ref = std::max(scale_ref, std::abs(v));
  for (const auto& [n, g] : modes_) {
    const Profile* mirror = find(-n);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Complex m = mirror ? (*mirror)[j] : Complex{};
      if (std::abs(g[j] - std::conj(m)) > tol * std::max<Real>(scale_ref, 1e-300L)) return false;
    }
  }
  return true;
}

void CollarField::mark_real(Real tol) {
  if (!is_real(tol)) throw Error(Errc::unsupported, "field is not real-valued");
  real_ = true;
}

Complex CollarField::value(std::size_t j, Real theta) const {
  Complex acc{};
  for (const auto& [n, g] : modes_) acc += g[j] * std::polar(1.0L, n * theta);
  return acc * collar_->rpow(weight_, j);
}

CollarField CollarField::rebased(int w) const {
  if (w == weight_) return *this;
  CollarField out(collar_, w);
  out.truncated_ = truncated_;
  out.real_ = real_;
  const int shift = weight_ - w;
  for (const auto& [n, g] : modes_) {
    Profile& o = out.mode(n);
    for (std::size_t j = 0; j < g.size(); ++j) o[j] = g[j] * collar_->rpow(shift, j);
  }
  return out;
}

void CollarField::prune() {
  for (auto it = modes_.begin(); it != modes_.end();) {
    const bool zero = std::all_of(it->second.begin(), it->second.end(),
                                  [](const Complex& v) { return v == Complex{}; });
    it = zero ? modes_.erase(it) : std::next(it);
  }
}

CollarField constant_field(const CollarPtr& collar, Complex value) {
  CollarField f(collar, 0);
  if (value != Complex{}) std::fill(f.mode(0).begin(), f.mode(0).end(), value);
  return f;
}

CollarField zero_field(const CollarPtr& collar, int weight) { return CollarField(collar, weight); }

void require_same_grid(const CollarField& a, const CollarField& b) {
  if (!a.collar() || !b.collar() ||
      (a.collar() != b.collar() && !a.geometry().grid.same_as(b.geometry().grid)))
    throw Error(Errc::grid_mismatch, "fields live on different collar grids");
}

CollarField add(const CollarField& a, const CollarField& b) {
  require_same_grid(a, b);
  const int w = std::min(a.weight(), b.weight());
  CollarField out = a.rebased(w);
  const CollarField bb = b.rebased(w);
  for (const auto& [n, g] : bb.modes()) {
    Profile& o = out.mode(n);
    for (std::size_t j = 0; j < g.size(); ++j) o[j] += g[j];
  }
  if (b.truncated()) out.flag_truncated();
  return out;
}

CollarField sub(const CollarField& a, const CollarField& b) { return add(a, scale(b, -1)); }

CollarField mul(const CollarField& a, const CollarField& b) {
  require_same_grid(a, b);
  const int bw = a.geometry().bandwidth;
  CollarField out(a.collar(), a.weight() + b.weight());
  if (a.truncated() || b.truncated()) out.flag_truncated();
  for (const auto& [na, ga] : a.modes()) {
    for (const auto& [nb, gb] : b.modes()) {
      const int n = na + nb;
      if (std::abs(n) > bw) {
        out.flag_truncated();
        continue;
      }
      Profile& o = out.mode(n);
      for (std::size_t j = 0; j < ga.size(); ++j) o[j] += ga[j] * gb[j];
    }
  }
  return out;
}

CollarField conj(const CollarField& a) {
  CollarField out(a.collar(), a.weight());
  if (a.truncated()) out.flag_truncated();
  for (const auto& [n, g] : a.modes()) {
    Profile& o = out.mode(-n);
    for (std::size_t j = 0; j < g.size(); ++j) o[j] = std::conj(g[j]);
  }
  return out;
}

CollarField scale(const CollarField& a, Complex s) {
  CollarField out(a.collar(), a.weight());
  if (a.truncated()) out.flag_truncated();
  for (const auto& [n, g] : a.modes()) {
    Profile& o = out.mode(n);
    for (std::size_t j = 0; j < g.size(); ++j) o[j] = g[j] * s;
  }
  return out;
}

CollarField field_arith(const CollarField& a, const CollarField& b, Arith op, Complex s) {
  switch (op) {
    case Arith::add: return add(a, b);
    case Arith::mul: return mul(a, b);
    case Arith::conj: return conj(a);
    case Arith::scale: return scale(a, s);
  }
  throw Error(Errc::unsupported, "unknown field operation");
}

Real tail_mode_fraction(const CollarField& f) {
  if (f.empty()) return 0;
  const int bw = f.geometry().bandwidth;
  Real total = 0, tail = 0;
  for (const auto& [n, g] : f.modes()) {
    Real e = 0;
    for (const auto& v : g) e += std::norm(v);
    total += e;
    if (std::abs(n) >= bw - 1) tail += e;
  }
  return total > 0 ? tail / total : 0;
}

Real derivative_disagreement(const CollarField& f) {
  const TauGrid& grid = f.geometry().grid;
  Real worst = 0;
  for (const auto& [n, g] : f.modes()) {
    Profile hi, lo;
    grid.diff1(g, hi);
    const auto& rows = grid.d1_low();
    lo.assign(g.size(), Complex{});
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].w.size(); ++k) lo[i] += rows[i].w[k] * g[rows[i].first + k];
    Real top = 0, diff = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      top = std::max(top, std::abs(hi[j]));
      diff = std::max(diff, std::abs(hi[j] - lo[j]));
    }
    if (top > 0) worst = std::max(worst, diff / top);
  }
  return worst;
}

CollarField wirtinger(const CollarField& f, Wirtinger which, bool check) {
  if (check) {
    if (tail_mode_fraction(f) > 1e-8L)
      throw Error(Errc::under_resolved, "angular tail carries more than 1e-8 of the energy");
    if (derivative_disagreement(f) > 1e-4L)
      throw Error(Errc::under_resolved, "radial derivative fails the convergence probe");
  }
  const Collar& col = f.geometry();
  const Real u = col.u();
  const int w = f.weight();
  CollarField out(f.collar(), w - 1);
  if (f.truncated()) out.flag_truncated();
  Profile gp;
  for (const auto& [n, g] : f.modes()) {
    col.grid.diff1(g, gp);
    const int shift = which == Wirtinger::dz ? -1 : 1;
    const Real k = which == Wirtinger::dz ? Real(w + n) : Real(w - n);
    Profile& o = out.mode(n + shift);
    for (std::size_t j = 0; j < g.size(); ++j) o[j] = 0.5L * (u * gp[j] + k * g[j]);
  }
  return out;
}

Real sup_norm(const CollarField& f, std::optional<TauRange> region) {
  if (f.empty()) return 0;
  const Collar& col = f.geometry();
  const auto& tau = col.grid.nodes();
  const bool single = f.modes().size() == 1;
  const int span = f.max_mode() - f.min_mode() + 1;
  const int samples = std::max(16, 4 * span);
  std::vector<std::vector<Complex>> phase;
  if (!single) {
    phase.resize(samples);
    for (int s = 0; s < samples; ++s) {
      const Real theta = 2 * pi * s / samples;
      for (const auto& [n, g] : f.modes()) phase[s].push_back(std::polar(1.0L, n * theta));
    }
  }
  Real best = 0;
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (region && (tau[j] < region->first || tau[j] > region->second)) continue;
    const Real rw = col.rpow(f.weight(), j);
    if (single) {
      best = std::max(best, std::abs(f.modes().begin()->second[j]) * rw);
      continue;
    }
    for (int s = 0; s < samples; ++s) {
      Complex acc{};
      std::size_t k = 0;
      for (const auto& [n, g] : f.modes()) acc += g[j] * phase[s][k++];
      best = std::max(best, std::abs(acc) * rw);
    }
  }
  return best;
}

namespace {

Complex weighted_sum(const Collar& col, int w, const Profile& g) {
  Complex acc{};
  for (std::size_t j = 0; j < g.size(); ++j) acc += col.dv[j] * col.rpow(w, j) * g[j];
  return acc;
}

}  // namespace

Complex volume_integral(const CollarField& f) {
  const Profile* g = f.find(0);
  return g ? weighted_sum(f.geometry(), f.weight(), *g) : Complex{};
}

Complex pair_integral(const CollarField& a, const CollarField& b) {
  require_same_grid(a, b);
  const Collar& col = a.geometry();
  const int w = a.weight() + b.weight();
  Complex acc{};
  for (const auto& [n, ga] : a.modes()) {
    const Profile* gb = b.find(-n);
    if (!gb) continue;
    for (std::size_t j = 0; j < ga.size(); ++j) acc += col.dv[j] * col.rpow(w, j) * ga[j] * (*gb)[j];
  }
  return acc;
}

Complex inner(const CollarField& a, const CollarField& b) {
  require_same_grid(a, b);
  const Collar& col = a.geometry();
  const int w = a.weight() + b.weight();
  Complex acc{};
  for (const auto& [n, ga] : a.modes()) {
    const Profile* gb = b.find(n);
    if (!gb) continue;
    for (std::size_t j = 0; j < ga.size(); ++j)
      acc += col.dv[j] * col.rpow(w, j) * ga[j] * std::conj((*gb)[j]);
  }
  return acc;
}

}  // namespace collarlab
