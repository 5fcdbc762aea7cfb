#pragma once

#include <array>
#include <functional>

#include "collarlab/fields.hpp"

namespace collarlab {

// lambda (weight -2), lambda^{-1} (weight +2) and the conformal factor lambda^{p/2} (weight -p).
CollarField metric_field(const CollarPtr& collar);
CollarField inverse_metric_field(const CollarPtr& collar);
CollarField conformal_power(const CollarPtr& collar, int p);

enum class Maass { K, L };
// K_p f = rho^{p-1} dz(rho^{-p} f), L_p f = rho^{-p-1} dzbar(rho^p f), rho = lambda^{1/2}.
CollarField maass(int p, const CollarField& f, Maass which, bool check = false);

// P f = dz(lambda^{-1} dz f).
CollarField op_P(const CollarField& f);
// conj(P(conj f)).
CollarField op_Pbar(const CollarField& f);

// -lambda^{-1} dz dzbar f, evaluated per mode from the closed radial form.
CollarField box(const CollarField& f);
CollarField apply_box1(const CollarField& g);

// -lambda^{-1} dz(A dz f).
CollarField xi(const CollarField& a, const CollarField& f);

// Pbar(e_kl) P(f) - 2 f_kl box(f) + lambda^{-1} dz(f_kl) dzbar(f).
CollarField q_operator(const CollarField& e_kl, const CollarField& f_kl, const CollarField& f);

// Index symmetrizers: sums over position permutations (repeated values still count).
enum class Symmetrizer { sigma1, sigma2, sigma1_tilde };
using Triple = std::array<int, 3>;
std::vector<Triple> permutations3(const Triple& t);
Complex sigma1(const std::function<Complex(int, int, int)>& fn, int i, int k, int a);
Complex sigma2(const std::function<Complex(int, int)>& fn, int j, int b);
Complex sigma1_tilde(const std::function<Complex(int, int, int)>& fn, int j, int l, int b);
std::size_t symmetrizer_terms(Symmetrizer which);

// ||f||_k for k <= 2 on a section of weight p: sup of f and all <= k-fold K/L compositions.
Real ck_norm(const CollarField& f, int k, std::optional<TauRange> region = std::nullopt, int p = 0);

}  // namespace collarlab
