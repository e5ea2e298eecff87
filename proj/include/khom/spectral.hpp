#pragma once

#include "khom/diffop.hpp"

#include <memory>

namespace khom {

/// Fourier modes e^{im theta} e_j, -M <= m <= M, ordered m ascending then
/// fiber index ascending.
struct ModeBasis {
  int M = 0;
  int k = 1;

  int dim() const { return (2 * M + 1) * k; }
  int index(int m, int j) const { return (m + M) * k + j; }
  int mode_of(int idx) const { return idx / k - M; }
  int fiber_of(int idx) const { return idx % k; }
};

struct EigenDecomposition {
  RVec lambda;  // ascending
  Mat V;        // unitary frame, columns are eigenvectors
  double residual;
};

/// Galerkin matrices of a DiffOp over a ModeBasis, with the whitened
/// Hermitian form in an orthonormal frame.
struct DiscreteOperator {
  ModeBasis basis;
  Mat gram;      // G, Hermitian positive definite
  Mat galerkin;  // K with <Du, v> = coeff(v)^dagger K coeff(u)
  Mat chol_R;    // upper factor, G = R^dagger R
  Mat white;     // Hhat = R^-dagger K R^-1, Hermitian after symmetrization
  double hermiticity_residual = 0.0;  // ||Hhat - Hhat^dagger|| before symmetrization

  const EigenDecomposition& eig() const;  // cached, write-once
  Vec to_white(const Vec& mode_coeffs) const { return chol_R * mode_coeffs; }
  Vec from_white(const Vec& w) const;

 private:
  mutable std::shared_ptr<EigenDecomposition> eig_;
};

/// Quadrature Galerkin assembly. Requires 4*M <= N so the grid resolves all
/// products of retained modes against the coefficient bandwidth.
DiscreteOperator assemble(const DiffOp& d, const CircleBundleSpec& spec, int M);

/// One DiscreteOperator per cutoff; cutoffs strictly increasing.
std::vector<DiscreteOperator> refine_ladder(const DiffOp& d, const CircleBundleSpec& spec,
                                            const std::vector<int>& cutoffs,
                                            bool parallel = false);

/// Whitened matrix of the multiplication operator by the sampled scalar u.
Mat multiplier_matrix(const Vec& scalar_samples, const CircleBundleSpec& spec,
                      const DiscreteOperator& op);

/// Whitened matrix of pointwise multiplication by per-sample k x k matrices.
Mat matrix_multiplier(const std::vector<Mat>& X, const CircleBundleSpec& spec,
                      const DiscreteOperator& op);

/// Coefficients of a band-limited section in the mode basis (Galerkin
/// projection through the Gram matrix).
Vec project_section(const Section& u, const CircleBundleSpec& spec, const DiscreteOperator& op);

Section synthesize(const Vec& mode_coeffs, const CircleBundleSpec& spec, const ModeBasis& basis);

struct ResolventReport {
  double norm_plus;   // ||(Hhat + i)^-1||
  double norm_minus;  // ||(Hhat - i)^-1||
  double identity_residual;  // worst |(||(Hhat±i)x||^2 - ||Hhat x||^2 - ||x||^2)| / ||x||^2
};

ResolventReport resolvent_check(const DiscreteOperator& op, Rng& rng, int trials = 10);

}  // namespace khom
