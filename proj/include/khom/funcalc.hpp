#pragma once

#include "khom/spectral.hpp"

#include <functional>
#include <map>

namespace khom {

using ScalarFn = std::function<cxd(double)>;

/// h(Hhat) = V h(Lambda) V^dagger through the cached eigendecomposition.
/// Throws if h is non-finite at an eigenvalue (names the eigenvalue).
Mat func_calc(const DiscreteOperator& op, const ScalarFn& h);

/// Cayley transform (Hhat + i)(Hhat - i)^-1, a unitary without eigenvalue 1.
Mat cayley(const DiscreteOperator& op);

struct InverseCayleyResult {
  Mat hermitian;        // i (U + 1)(U - 1)^-1
  double min_dist_to_one;  // min |lambda(U) - 1|
};

/// Inverse Cayley transform; requires 1 not in the spectrum of U.
InverseCayleyResult inverse_cayley(const Mat& u, double tol = 1e-8);

/// e^{2 pi i s Hhat} (default) or e^{i s Hhat} when two_pi_convention = false.
Mat unitary_group(const DiscreteOperator& op, double s, bool two_pi_convention = true);

struct GradedCommutationReport {
  double even_residual;  // ||T h_e(Hhat) - h_e(Hhat) T||
  double odd_residual;   // ||T h_o(Hhat) + h_o(Hhat) T||
  double hypothesis_residual;  // ||T Hhat + Hhat T||
};

/// Checks the graded commutation law for T anticommuting with Hhat and the
/// even/odd parts of h.
GradedCommutationReport graded_commutation_check(const DiscreteOperator& op, const Mat& T,
                                                 const ScalarFn& h,
                                                 double hypothesis_tol = 1e-8);

/// Scalar Cayley map c(t) = (t + i)/(t - i).
inline cxd cayley_scalar(double t) { return (cxd(t, 1.0)) / (cxd(t, -1.0)); }

class NormalizingFn;

/// Named function presets for functional-calculus arguments:
/// "id", "sign_smooth:a" (x/sqrt(x^2+a^2)), "arctan" ((2/pi) atan),
/// "sqrt_rational" (x/sqrt(1+x^2)), "chi:<id>" (registered normalizing
/// function), "exp", "cayley".
ScalarFn parse_function_preset(const std::string& name,
                               const std::map<std::string, const NormalizingFn*>& chi_registry = {});

}  // namespace khom
