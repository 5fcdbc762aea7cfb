#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace collarlab {

// Extended precision: raw collar quantities reach |t|^-6 ~ e^{1500} at u = 0.0125.
using Real = long double;
using Complex = std::complex<Real>;
using Profile = std::vector<Complex>;

inline constexpr Real pi = std::numbers::pi_v<Real>;

enum class Errc {
  domain_empty,
  invalid_cut,
  out_of_domain,
  grid_mismatch,
  under_resolved,
  coefficient_bound,
  unknown_case,
  singular,
  not_hermitian,
  not_positive_definite,
  residual,
  unsupported,
  degenerate_fit,
  config,
  io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace collarlab
