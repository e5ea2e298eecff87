#include "khom/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <future>

namespace khom {

namespace {

// T[j][j'](dm) = (2pi/N) sum_l f_l (H_l X_l)_{j j'} e^{-i dm theta_l}
// for dm in [-2M, 2M]; Galerkin entries are Toeplitz in the mode offset.
std::vector<Mat> coefficient_transform(const std::vector<Mat>& X, const CircleBundleSpec& spec,
                                       int M) {
  const int N = spec.N, k = spec.k;
  std::vector<Mat> weighted(N);
  for (int l = 0; l < N; ++l) weighted[l] = spec.f[l] * (spec.H[l] * X[l]);
  std::vector<Mat> T(4 * M + 1, Mat::Zero(k, k));
  for (int dm = -2 * M; dm <= 2 * M; ++dm) {
    Mat acc = Mat::Zero(k, k);
    for (int l = 0; l < N; ++l) {
      double ang = -dm * kTwoPi * l / N;
      acc += weighted[l] * cxd(std::cos(ang), std::sin(ang));
    }
    T[dm + 2 * M] = acc * (kTwoPi / N);
  }
  return T;
}

}  // namespace

const EigenDecomposition& DiscreteOperator::eig() const {
  if (!eig_) {
    Eigen::SelfAdjointEigenSolver<Mat> es(white);
    if (es.info() != Eigen::Success)
      throw numeric_error("DiscreteOperator: Hermitian eigensolver failed");
    auto dec = std::make_shared<EigenDecomposition>();
    dec->lambda = es.eigenvalues();
    dec->V = es.eigenvectors();
    dec->residual = (white * dec->V - dec->V * dec->lambda.asDiagonal()).norm();
    eig_ = std::move(dec);
  }
  return *eig_;
}

Vec DiscreteOperator::from_white(const Vec& w) const {
  return chol_R.triangularView<Eigen::Upper>().solve(w);
}

DiscreteOperator assemble(const DiffOp& d, const CircleBundleSpec& spec, int M) {
  d.validate();
  if (d.k() != spec.k || d.N() != spec.N)
    throw input_error("assemble: operator does not conform to spec");
  if (M < 1) throw input_error("assemble: cutoff must be positive");
  if (4 * M > spec.N)
    throw input_error("assemble: cutoff " + std::to_string(M) + " too large for grid N = " +
                      std::to_string(spec.N) + " (need 4M <= N)");

  const int k = spec.k;
  DiscreteOperator op;
  op.basis = ModeBasis{M, k};
  const int dim = op.basis.dim();

  std::vector<Mat> eye(spec.N, Mat::Identity(k, k));
  std::vector<Mat> TG = coefficient_transform(eye, spec, M);
  std::vector<Mat> TA = coefficient_transform(d.A, spec, M);
  std::vector<Mat> TB = coefficient_transform(d.B, spec, M);

  op.gram = Mat::Zero(dim, dim);
  op.galerkin = Mat::Zero(dim, dim);
  for (int m = -M; m <= M; ++m) {
    for (int mp = -M; mp <= M; ++mp) {
      const Mat& g = TG[(m - mp) + 2 * M];
      Mat kblk = cxd(0, 1) * static_cast<double>(mp) * TA[(m - mp) + 2 * M] +
                 TB[(m - mp) + 2 * M];
      for (int j = 0; j < k; ++j)
        for (int jp = 0; jp < k; ++jp) {
          op.gram(op.basis.index(m, j), op.basis.index(mp, jp)) = g(j, jp);
          op.galerkin(op.basis.index(m, j), op.basis.index(mp, jp)) = kblk(j, jp);
        }
    }
  }
  op.gram = 0.5 * (op.gram + op.gram.adjoint().eval());

  Eigen::LLT<Mat> llt(op.gram);
  if (llt.info() != Eigen::Success)
    throw numeric_error("assemble: Gram matrix not positive definite (under-resolved quadrature)");
  op.chol_R = llt.matrixL().adjoint();

  Mat Linv = llt.matrixL().solve(Mat::Identity(dim, dim));
  Mat pre = Linv * op.galerkin * Linv.adjoint();
  op.hermiticity_residual = op_norm(pre - pre.adjoint());
  op.white = 0.5 * (pre + pre.adjoint().eval());
  return op;
}

std::vector<DiscreteOperator> refine_ladder(const DiffOp& d, const CircleBundleSpec& spec,
                                            const std::vector<int>& cutoffs, bool parallel) {
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1])
      throw input_error("refine_ladder: cutoffs must be strictly increasing");
  std::vector<DiscreteOperator> out(cutoffs.size());
  if (parallel && cutoffs.size() > 1) {
    std::vector<std::future<DiscreteOperator>> futs;
    futs.reserve(cutoffs.size());
    for (int M : cutoffs)
      futs.push_back(std::async(std::launch::async,
                                [&d, &spec, M] { return assemble(d, spec, M); }));
    for (std::size_t i = 0; i < futs.size(); ++i) out[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < cutoffs.size(); ++i) out[i] = assemble(d, spec, cutoffs[i]);
  }
  return out;
}

Mat matrix_multiplier(const std::vector<Mat>& X, const CircleBundleSpec& spec,
                      const DiscreteOperator& op) {
  if (static_cast<int>(X.size()) != spec.N)
    throw input_error("matrix_multiplier: sample count mismatch");
  const int k = spec.k, M = op.basis.M;
  std::vector<Mat> T = coefficient_transform(X, spec, M);
  const int dim = op.basis.dim();
  Mat K = Mat::Zero(dim, dim);
  for (int m = -M; m <= M; ++m)
    for (int mp = -M; mp <= M; ++mp) {
      const Mat& blk = T[(m - mp) + 2 * M];
      for (int j = 0; j < k; ++j)
        for (int jp = 0; jp < k; ++jp)
          K(op.basis.index(m, j), op.basis.index(mp, jp)) = blk(j, jp);
    }
  Mat Linv = op.chol_R.adjoint().triangularView<Eigen::Lower>().solve(
      Mat::Identity(dim, dim));
  return Linv * K * Linv.adjoint();
}

Mat multiplier_matrix(const Vec& scalar_samples, const CircleBundleSpec& spec,
                      const DiscreteOperator& op) {
  if (scalar_samples.size() != spec.N)
    throw input_error("multiplier_matrix: sample count mismatch");
  std::vector<Mat> X(spec.N);
  for (int l = 0; l < spec.N; ++l)
    X[l] = scalar_samples[l] * Mat::Identity(spec.k, spec.k);
  return matrix_multiplier(X, spec, op);
}

Vec project_section(const Section& u, const CircleBundleSpec& spec, const DiscreteOperator& op) {
  const int M = op.basis.M, k = spec.k;
  const int dim = op.basis.dim();
  // Right-hand side <u, b_alpha>-bar pattern: rhs_alpha = <b-coeff form>:
  // coeffs c solve G c = r with r_alpha = (2pi/N) sum_l f_l (b_alpha)^dagger H u.
  Vec r(dim);
  for (int m = -M; m <= M; ++m)
    for (int j = 0; j < k; ++j) {
      cxd acc(0, 0);
      for (int l = 0; l < spec.N; ++l) {
        double ang = -m * kTwoPi * l / spec.N;
        cxd phase(std::cos(ang), std::sin(ang));
        acc += spec.f[l] * phase * (spec.H[l].row(j) * u.samples.col(l))(0, 0);
      }
      r[op.basis.index(m, j)] = acc * (kTwoPi / spec.N);
    }
  Eigen::LLT<Mat> llt(op.gram);
  return llt.solve(r);
}

Section synthesize(const Vec& mode_coeffs, const CircleBundleSpec& spec, const ModeBasis& basis) {
  Mat s = Mat::Zero(spec.k, spec.N);
  for (int idx = 0; idx < basis.dim(); ++idx) {
    int m = basis.mode_of(idx), j = basis.fiber_of(idx);
    for (int l = 0; l < spec.N; ++l) {
      double ang = m * kTwoPi * l / spec.N;
      s(j, l) += mode_coeffs[idx] * cxd(std::cos(ang), std::sin(ang));
    }
  }
  return Section(std::move(s));
}

ResolventReport resolvent_check(const DiscreteOperator& op, Rng& rng, int trials) {
  const int dim = op.basis.dim();
  // Smallest singular values of Hhat +/- i; for Hermitian input these are
  // min sqrt(lambda^2 + 1) >= 1, so a near-zero value flags corrupted input.
  auto sv_plus = singular_values(op.white + kI * Mat::Identity(dim, dim));
  auto sv_minus = singular_values(op.white - kI * Mat::Identity(dim, dim));
  double mn_plus = sv_plus.back(), mn_minus = sv_minus.back();
  if (mn_plus < 1e-12 || mn_minus < 1e-12)
    throw numeric_error("resolvent_check: Hhat +/- i numerically singular; input corrupted?");
  ResolventReport rep{1.0 / mn_plus, 1.0 / mn_minus, 0.0};
  for (int t = 0; t < trials; ++t) {
    Vec x = rng.cnormal_vec(dim);
    double nx2 = x.squaredNorm();
    Vec hx = op.white * x;
    for (int sign : {+1, -1}) {
      Vec y = hx + cxd(0, sign) * x;
      double res = std::abs(y.squaredNorm() - hx.squaredNorm() - nx2) / nx2;
      rep.identity_residual = std::max(rep.identity_residual, res);
    }
  }
  return rep;
}

}  // namespace khom
