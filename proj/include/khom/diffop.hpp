#pragma once

#include "khom/geometry.hpp"

#include <optional>

namespace khom {

/// First-order operator Du = A(theta) u' + B(theta) u with matrix coefficients.
struct DiffOp {
  std::vector<Mat> A;  // per-sample k x k leading coefficient
  std::vector<Mat> B;  // per-sample k x k zeroth-order part
  std::optional<Mat> grading;  // gamma_S with gamma^2 = I; flips sign of A and B

  int k() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int N() const { return static_cast<int>(A.size()); }

  /// Checks sample counts and, when graded, gamma A gamma = -A, gamma B gamma = -B.
  void validate() const;
};

/// D = -i d/dtheta on the rank-k trivial bundle.
DiffOp dirac(int k, int N);

/// k = 2, A = [[0,-i],[-i,0]], B = 0, grading diag(1,-1).
DiffOp graded_dirac(int N);

/// Multiplication operator A = 0, B = V(theta).
DiffOp multiplication_op(std::vector<Mat> V);

struct SymbolValue {
  double theta;
  double xi;
  Mat matrix;  // xi * A(theta)
};

struct EllipticityReport {
  bool elliptic;
  double min_abs_det;  // min over grid of |det A(theta)|
};

struct SymmetryReport {
  double max_residual;  // max |<Du,v> - <u,Dv>| over unit trial pairs
  bool symmetric;
};

/// A(theta) u'(theta) + B(theta) u(theta), derivative by spectral differentiation.
Section apply(const DiffOp& d, const Section& u);

SymbolValue symbol(const DiffOp& d, double theta, double xi);

EllipticityReport is_elliptic(const DiffOp& d, double tol = 1e-8);

/// Per-sample matrices of [D, M_g] = g'(theta) A(theta); equals
/// sigma_D(p, dg|_p) on each fiber.
std::vector<Mat> commutator_mult(const DiffOp& d, const Vec& g);

SymmetryReport check_symmetric(const DiffOp& d, const CircleBundleSpec& spec, int trials,
                               double tol, Rng& rng);

}  // namespace khom
