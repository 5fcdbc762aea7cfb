#pragma once

#include <array>

#include "collarlab/differentials.hpp"
#include "collarlab/green.hpp"

namespace collarlab {

enum class TensorKind { wp, ricci, perturbed };

// R_{i jbar k lbar} stored densely.
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  CurvatureTensor(std::size_t n, TensorKind kind);
  std::size_t size() const { return n_; }
  TensorKind kind() const { return kind_; }
  Complex& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l);
  Complex operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;
  // max |R_{ijkl} - conj R_{jilk}| relative to max |R|.
  Real hermitian_defect() const;
  // max of |R_{ijkl} - R_{kjil}| and |R_{ijkl} - R_{ilkj}| relative to max |R|.
  Real pair_symmetry_defect() const;

 private:
  std::size_t n_ = 0;
  TensorKind kind_ = TensorKind::wp;
  std::vector<Complex> v_;
};

struct RicciBlocks {
  Complex a{}, b{}, c{}, d{};
  Complex perturbation{};  // C R_{ijkl}; zero for the Ricci metric
  Complex total() const { return a + b + c + d + perturbation; }
};

struct G1Report {
  std::size_t index = 0;
  Real u = 0, t_abs = 0;
  Real scale = 0;                  // u^4 / |t|^4
  std::array<Complex, 4> terms{};  // third entered with its minus sign
  Complex term2_reduced{};         // 6 h^{ii} int |K0 e|^2 (2e - 4f) dv
  Complex sum{};
  std::array<Real, 4> targets{};   // (9, -9, -3, 9) / (16 pi^4) * scale
  Real target_sum = 0;
  std::array<Real, 4> rel_err{};
  Real sum_rel_err = 0;
  Complex g2{};                    // terms with at least one index other than i
  std::array<Complex, 4> g2_blocks{};  // per block a, b, c, d
};

// All fields and integral tables of one model; immutable after construction.
class CurvatureEngine {
 public:
  explicit CurvatureEngine(Model model, const SolverConfig& cfg = {});

  const Model& model() const { return model_; }
  std::size_t n() const { return model_.n; }
  std::size_t m() const { return model_.m(); }

  const CollarField& A(std::size_t i, std::size_t col) const;
  const CollarField& f(std::size_t i, std::size_t j, std::size_t col) const;
  const CollarField& e(std::size_t i, std::size_t j, std::size_t col) const;
  const CollarField& xi_e(std::size_t k, std::size_t i, std::size_t j, std::size_t col) const;
  const CollarField& t_xi_e(std::size_t k, std::size_t i, std::size_t j, std::size_t col) const;
  bool support_warning() const { return support_warning_; }

  const MetricMatrix& wp() const { return h_; }
  const ComplexMatrix& wp_upper() const { return h_up_; }
  const CurvatureTensor& wp_curvature() const { return R_; }
  const MetricMatrix& ricci_metric() const { return tau_; }
  const ComplexMatrix& ricci_upper() const { return tau_up_; }

  RicciBlocks ricci_curvature(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;
  MetricMatrix perturbed_metric(Real C) const;
  RicciBlocks perturbed_curvature(std::size_t i, std::size_t j, std::size_t k, std::size_t l, Real C) const;
  CurvatureTensor ricci_tensor() const;

  G1Report g1_terms(std::size_t i) const;
  // G1 terms of the perturbed curvature (block c uses the perturbed inverse).
  G1Report perturbed_g1_terms(std::size_t i, Real C) const;

  // Integral tables (summed over collars).
  Complex R(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const { return R_(i, j, k, l); }
  // int xi_k(e_{iq}) e_{ab} dv
  Complex W(std::size_t k, std::size_t i, std::size_t q, std::size_t a, std::size_t b) const;
  // int conj-xi_l(e_{pj}) e_{gd} dv
  Complex Y(std::size_t l, std::size_t p, std::size_t j, std::size_t g, std::size_t d) const;
  // int T(xi_k(e_{ij})) conj-xi_x(e_{yz}) dv
  Complex V(std::size_t k, std::size_t i, std::size_t j, std::size_t x, std::size_t y, std::size_t z) const;
  // int Q_{kl}(e_{ij}) e_{ab} dv
  Complex Qint(std::size_t k, std::size_t l, std::size_t i, std::size_t j, std::size_t a, std::size_t b) const;

 private:
  enum class Filter { all, leading, remainder };
  RicciBlocks assemble(std::size_t i, std::size_t j, std::size_t k, std::size_t l, const ComplexMatrix& tau_up,
                       Filter filter) const;
  G1Report g1_report(std::size_t i, const ComplexMatrix& tau_up, Real C) const;
  std::size_t idx(std::initializer_list<std::size_t> ix) const;

  Model model_;
  SolverConfig cfg_;
  bool support_warning_ = false;
  // Per collar, flattened by index tuple.
  std::vector<std::vector<CollarField>> A_, f_, e_, xi_, txi_;
  MetricMatrix h_, tau_;
  ComplexMatrix h_up_, tau_up_;
  CurvatureTensor R_;
  std::vector<Complex> W_, Y_, V_, Q_;
};

// Maass-form reduction of the diagonal Q pairing: int |K0 e|^2 (2e - 4f) dv.
Complex reduced_q_pairing(const CollarField& e, const CollarField& f);

// Two sides of the Q pairing identity on one collar.
struct QPairing {
  Complex direct{};   // int Q_{kl}(e_ij) e_ab dv
  Complex reduced{};  // right-hand side in Maass form
};
QPairing q_pairing_identity(const CollarField& e_kl, const CollarField& e_ij, const CollarField& e_ab);

// det(tau~) / [prod_i (u_i^2/|t_i|^2)(3/(4 pi^2) + C u_i / 2) det(A + C B)].
Real perturbed_determinant_ratio(const CurvatureEngine& engine, Real C);

}  // namespace collarlab
