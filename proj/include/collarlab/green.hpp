#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "collarlab/operators.hpp"

namespace collarlab {

enum class Boundary { dirichlet_zero };

struct SolverConfig {
  Boundary boundary = Boundary::dirichlet_zero;
  int intervals = 0;          // 0: use the input grid; otherwise must equal it
  int mode_cutoff = 64;       // largest |n| accepted
  Real tolerance = 1e-12L;    // target for iterative refinement of each mode solve
  Real residual_tol = 1e-6L;  // sup residual on interior nodes relative to ||f||_0
  bool check_support = true;
};

struct SolveDiagnostics {
  Real residual = 0;             // relative interior residual
  bool support_warning = false;  // f not small on the outer 10% of the interval
  int modes = 0;
};

// Banded LU with partial pivoting (real entries).
class BandedLU {
 public:
  BandedLU(std::size_t n, int kl, int ku);
  Real& at(std::size_t i, std::size_t j);
  Real at(std::size_t i, std::size_t j) const;
  void factor();
  void solve(std::vector<Real>& b) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  int kl_, ku_, ld_;
  std::vector<Real> ab_;
  std::vector<std::size_t> piv_;
};

// g = (box + 1)^{-1} f with g = 0 at both collar ends, mode by mode.
CollarField solve_T(const CollarField& f, const SolverConfig& cfg = {}, SolveDiagnostics* diag = nullptr);

// Relative sup residual of (box + 1) g - f over interior nodes.
Real interior_residual(const CollarField& g, const CollarField& f);
// sup |f| over the outer 10% of the tau interval at each end, relative to ||f||_0.
Real boundary_fraction(const CollarField& f);

// Uniform [0,1) variate from the top 53 bits; identical on every platform.
Real unit_uniform(std::mt19937_64& rng);

// Real field with modes |n| <= max_mode, each a C^infinity bump inside the middle 70% of the interval.
CollarField random_supported_field(const CollarPtr& collar, std::mt19937_64& rng, int max_mode = 2);

struct SpectralReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  Real worst_lower = 0;  // max of (int |Tf|^2 - Re int Tf conj f) / int |f|^2
  Real worst_upper = 0;  // max of (Re int Tf conj f - int |f|^2) / int |f|^2
};
// int |Tf|^2 <= int Tf conj(f) <= int |f|^2 with the given slack.
SpectralReport spectral_check(const CollarPtr& collar, std::size_t samples, std::uint64_t seed,
                              Real slack = 1e-10L, const SolverConfig& cfg = {});

// |int Tf conj h - int f conj(Th)| relative to the larger magnitude.
Real self_adjoint_defect(const CollarField& f, const CollarField& h, const SolverConfig& cfg = {});

using FieldBuilder = std::function<CollarField(const CollarPtr&)>;
// Relative change of int T(f) conj(h) dv when c is replaced by factor * c.
Real boundary_sensitivity(const CollarParams& p, const FieldBuilder& f, const FieldBuilder& h,
                          int intervals = default_intervals, Real factor = 0.9L);

}  // namespace collarlab
