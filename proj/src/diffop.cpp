#include "khom/diffop.hpp"

#include <cmath>

namespace khom {

void DiffOp::validate() const {
  if (A.empty() || A.size() != B.size()) throw input_error("DiffOp: A and B sample counts differ");
  const int kk = k();
  for (const auto& m : A)
    if (m.rows() != kk || m.cols() != kk) throw input_error("DiffOp: ragged A samples");
  for (const auto& m : B)
    if (m.rows() != kk || m.cols() != kk) throw input_error("DiffOp: ragged B samples");
  if (grading) {
    const Mat& g = *grading;
    if (g.rows() != kk || g.cols() != kk) throw input_error("DiffOp: grading has wrong size");
    if ((g * g - Mat::Identity(kk, kk)).cwiseAbs().maxCoeff() > 1e-12)
      throw input_error("DiffOp: grading must square to the identity");
    for (int j = 0; j < N(); ++j) {
      if ((g * A[j] * g + A[j]).cwiseAbs().maxCoeff() > 1e-12 ||
          (g * B[j] * g + B[j]).cwiseAbs().maxCoeff() > 1e-12)
        throw input_error("DiffOp: coefficients are not odd for the given grading");
    }
  }
}

DiffOp dirac(int k, int N) {
  DiffOp d;
  d.A.assign(N, -kI * Mat::Identity(k, k));
  d.B.assign(N, Mat::Zero(k, k));
  return d;
}

DiffOp graded_dirac(int N) {
  DiffOp d;
  Mat a(2, 2);
  a << cxd(0, 0), -kI, -kI, cxd(0, 0);
  d.A.assign(N, a);
  d.B.assign(N, Mat::Zero(2, 2));
  Mat g(2, 2);
  g << cxd(1, 0), cxd(0, 0), cxd(0, 0), cxd(-1, 0);
  d.grading = g;
  d.validate();
  return d;
}

DiffOp multiplication_op(std::vector<Mat> V) {
  DiffOp d;
  const int k = V.empty() ? 0 : static_cast<int>(V[0].rows());
  d.A.assign(V.size(), Mat::Zero(k, k));
  d.B = std::move(V);
  return d;
}

Section apply(const DiffOp& d, const Section& u) {
  if (u.k() != d.k() || u.N() != d.N()) throw input_error("apply: section does not conform");
  const int k = d.k(), N = d.N();
  Mat du(k, N);
  for (int r = 0; r < k; ++r)
    du.row(r) = spectral_derivative(u.samples.row(r).transpose()).transpose();
  Mat out(k, N);
  for (int j = 0; j < N; ++j) out.col(j) = d.A[j] * du.col(j) + d.B[j] * u.samples.col(j);
  return Section(std::move(out));
}

SymbolValue symbol(const DiffOp& d, double theta, double xi) {
  const int N = d.N();
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  int j = static_cast<int>(std::lround(t * N / kTwoPi)) % N;
  return SymbolValue{theta, xi, xi * d.A[j]};
}

EllipticityReport is_elliptic(const DiffOp& d, double tol) {
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& a : d.A) mn = std::min(mn, std::abs(a.determinant()));
  return EllipticityReport{mn > tol, mn};
}

std::vector<Mat> commutator_mult(const DiffOp& d, const Vec& g) {
  if (g.size() != d.N()) throw input_error("commutator_mult: scalar sample count mismatch");
  Vec dg = spectral_derivative(g);
  std::vector<Mat> out(d.A.size());
  for (int j = 0; j < d.N(); ++j) out[j] = dg[j] * d.A[j];
  return out;
}

SymmetryReport check_symmetric(const DiffOp& d, const CircleBundleSpec& spec, int trials,
                               double tol, Rng& rng) {
  if (trials < 1) throw input_error("check_symmetric: trials must be >= 1");
  const int maxdeg = std::min(spec.N / 4, 24);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Section u = random_band_limited(spec.k, spec.N, maxdeg, rng);
    Section v = random_band_limited(spec.k, spec.N, maxdeg, rng);
    cxd lhs = inner_product(apply(d, u), v, spec);
    cxd rhs = inner_product(u, apply(d, v), spec);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return SymmetryReport{worst, worst < tol};
}

}  // namespace khom
