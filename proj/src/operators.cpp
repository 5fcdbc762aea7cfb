#include "collarlab/operators.hpp"

#include <cmath>

namespace collarlab {

CollarField metric_field(const CollarPtr& collar) {
  const Real u = collar->u();
  return tabulate(collar, -2, 0, [u](Real t) {
    const Real s = std::sin(t);
    return 0.5L * u * u / (s * s);
  });
}

CollarField inverse_metric_field(const CollarPtr& collar) {
  const Real u = collar->u();
  return tabulate(collar, 2, 0, [u](Real t) {
    const Real s = std::sin(t);
    return 2 * s * s / (u * u);
  });
}

CollarField conformal_power(const CollarPtr& collar, int p) {
  const Real u = collar->u();
  return tabulate(collar, -p, 0, [u, p](Real t) {
    return std::pow(u / std::sqrt(2.0L) / std::abs(std::sin(t)), static_cast<Real>(p));
  });
}

CollarField maass(int p, const CollarField& f, Maass which, bool check) {
  const CollarPtr& c = f.collar();
  if (which == Maass::K)
    return mul(conformal_power(c, p - 1), wirtinger(mul(conformal_power(c, -p), f), Wirtinger::dz, check));
  return mul(conformal_power(c, -p - 1), wirtinger(mul(conformal_power(c, p), f), Wirtinger::dzbar, check));
}

CollarField op_P(const CollarField& f) { return dz(mul(inverse_metric_field(f.collar()), dz(f))); }

CollarField op_Pbar(const CollarField& f) { return conj(op_P(conj(f))); }

CollarField box(const CollarField& f) {
  const Collar& col = f.geometry();
  const Real u = col.u();
  const int w = f.weight();
  CollarField out(f.collar(), w);
  if (f.truncated()) out.flag_truncated();
  Profile g1, g2;
  for (const auto& [n, g] : f.modes()) {
    col.grid.diff1(g, g1);
    col.grid.diff2(g, g2);
    const Real a = 2.0L * w / u;
    const Real b = static_cast<Real>(w * w - n * n) / (u * u);
    Profile& o = out.mode(n);
    for (std::size_t j = 0; j < g.size(); ++j)
      o[j] = -0.5L * col.sin2[j] * (g2[j] + a * g1[j] + b * g[j]);
  }
  return out;
}

CollarField apply_box1(const CollarField& g) { return add(box(g), g); }

CollarField xi(const CollarField& a, const CollarField& f) {
  require_same_grid(a, f);
  return scale(mul(inverse_metric_field(f.collar()), dz(mul(a, dz(f)))), -1);
}

CollarField q_operator(const CollarField& e_kl, const CollarField& f_kl, const CollarField& f) {
  require_same_grid(e_kl, f);
  require_same_grid(f_kl, f);
  const CollarField first = mul(op_Pbar(e_kl), op_P(f));
  const CollarField second = scale(mul(f_kl, box(f)), -2);
  const CollarField third = mul(mul(inverse_metric_field(f.collar()), dz(f_kl)), dzbar(f));
  return add(add(first, second), third);
}

std::vector<Triple> permutations3(const Triple& t) {
  return {Triple{t[0], t[1], t[2]}, Triple{t[0], t[2], t[1]}, Triple{t[1], t[0], t[2]},
          Triple{t[1], t[2], t[0]}, Triple{t[2], t[0], t[1]}, Triple{t[2], t[1], t[0]}};
}

Complex sigma1(const std::function<Complex(int, int, int)>& fn, int i, int k, int a) {
  Complex acc{};
  for (const Triple& p : permutations3({i, k, a})) acc += fn(p[0], p[1], p[2]);
  return acc;
}

Complex sigma2(const std::function<Complex(int, int)>& fn, int j, int b) { return fn(j, b) + fn(b, j); }

Complex sigma1_tilde(const std::function<Complex(int, int, int)>& fn, int j, int l, int b) {
  return sigma1(fn, j, l, b);
}

std::size_t symmetrizer_terms(Symmetrizer which) { return which == Symmetrizer::sigma2 ? 2 : 6; }

Real ck_norm(const CollarField& f, int k, std::optional<TauRange> region, int p) {
  if (k < 0 || k > 2) throw Error(Errc::unsupported, "C^k norms are implemented for k <= 2");
  Real total = sup_norm(f, region);
  if (k == 0 || f.empty()) return total;
  const CollarField kf = maass(p, f, Maass::K);
  const CollarField lf = maass(p, f, Maass::L);
  total += sup_norm(kf, region) + sup_norm(lf, region);
  if (k == 1) return total;
  total += sup_norm(maass(p + 1, kf, Maass::K), region) + sup_norm(maass(p + 1, kf, Maass::L), region);
  total += sup_norm(maass(p - 1, lf, Maass::K), region) + sup_norm(maass(p - 1, lf, Maass::L), region);
  return total;
}

}  // namespace collarlab
