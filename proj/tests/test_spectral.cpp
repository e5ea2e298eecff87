#include <doctest.h>

#include "khom/spectral.hpp"

using namespace khom;

TEST_CASE("assembled dirac is diagonal with integer modes") {
  auto spec = CircleBundleSpec::flat(1, 64);
  DiscreteOperator op = assemble(dirac(1, 64), spec, 8);
  Mat expect = Mat::Zero(17, 17);
  for (int m = -8; m <= 8; ++m) expect(m + 8, m + 8) = cxd(m, 0);
  CHECK((op.white - expect).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(op.hermiticity_residual < 1e-10);
}

TEST_CASE("galerkin entries match the analytic dirac values") {
  auto spec = CircleBundleSpec::flat(1, 64);
  DiscreteOperator op = assemble(dirac(1, 64), spec, 6);
  for (int m = -6; m <= 6; ++m)
    for (int mp = -6; mp <= 6; ++mp) {
      cxd expect = (m == mp) ? cxd(kTwoPi * m, 0) : cxd(0, 0);
      CHECK(std::abs(op.galerkin(m + 6, mp + 6) - expect) < 1e-10);
    }
}

TEST_CASE("whitening: flat gram is 2 pi and white = K / 2 pi") {
  auto spec = CircleBundleSpec::flat(1, 64);
  DiscreteOperator op = assemble(dirac(1, 64), spec, 8);
  CHECK((op.gram - kTwoPi * Mat::Identity(17, 17)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((op.white - op.galerkin / kTwoPi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("constant Hermitian potential gives a block-constant Hermitian matrix") {
  const int N = 64;
  auto spec = CircleBundleSpec::flat(2, N);
  Mat V(2, 2);
  V << 1.0, cxd(0.3, 0.1), cxd(0.3, -0.1), -0.5;
  DiffOp d = multiplication_op(std::vector<Mat>(N, V));
  DiscreteOperator op = assemble(d, spec, 4);
  CHECK(op.hermiticity_residual < 1e-12);
  // each mode block equals V; cross-mode blocks vanish
  for (int m = -4; m <= 4; ++m)
    for (int mp = -4; mp <= 4; ++mp) {
      Mat blk(2, 2);
      for (int j = 0; j < 2; ++j)
        for (int jp = 0; jp < 2; ++jp)
          blk(j, jp) = op.white(op.basis.index(m, j), op.basis.index(mp, jp));
      Mat expect = (m == mp) ? V : Mat::Zero(2, 2);
      CHECK((blk - expect).cwiseAbs().maxCoeff() < 1e-10);
    }
  // spectrum identical at every level, multiplicity grows
  auto lad = refine_ladder(d, spec, {2, 4, 8});
  for (const auto& level : lad) {
    const auto& ev = level.eig().lambda;
    Eigen::SelfAdjointEigenSolver<Mat> vs(V);
    for (int i = 0; i < ev.size(); ++i) {
      double d0 = std::min(std::abs(ev[i] - vs.eigenvalues()[0]),
                           std::abs(ev[i] - vs.eigenvalues()[1]));
      CHECK(d0 < 1e-10);
    }
  }
}

TEST_CASE("skew first-order term shows up as the hermiticity residual") {
  auto spec = CircleBundleSpec::flat(1, 64);
  DiffOp d;
  d.A.assign(64, Mat::Identity(1, 1));  // d/dtheta, not symmetric
  d.B.assign(64, Mat::Zero(1, 1));
  DiscreteOperator op = assemble(d, spec, 8);
  CHECK(op.hermiticity_residual == doctest::Approx(2.0 * 8).epsilon(1e-8));
}

TEST_CASE("ladder spectra nest for the dirac family") {
  auto spec = CircleBundleSpec::flat(1, 64);
  auto lad = refine_ladder(dirac(1, 64), spec, {4, 8, 16});
  for (std::size_t lev = 0; lev + 1 < lad.size(); ++lev) {
    const auto& small = lad[lev].eig().lambda;
    const auto& big = lad[lev + 1].eig().lambda;
    for (int i = 0; i < small.size(); ++i) {
      double best = 1e9;
      for (int j = 0; j < big.size(); ++j) best = std::min(best, std::abs(small[i] - big[j]));
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("empty ladder and bad ladders") {
  auto spec = CircleBundleSpec::flat(1, 64);
  CHECK(refine_ladder(dirac(1, 64), spec, {}).empty());
  CHECK_THROWS_AS(refine_ladder(dirac(1, 64), spec, {8, 8}), input_error);
  CHECK_THROWS_AS(assemble(dirac(1, 64), spec, 64), input_error);  // 4M > N
}

TEST_CASE("parallel ladder matches serial assembly") {
  auto spec = CircleBundleSpec::flat(1, 64);
  auto serial = refine_ladder(dirac(1, 64), spec, {4, 8, 16}, false);
  auto parallel = refine_ladder(dirac(1, 64), spec, {4, 8, 16}, true);
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK((serial[i].white - parallel[i].white).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("resolvent norms and the norm identity") {
  Rng rng(4);
  SUBCASE("1x1 zero matrix") {
    auto spec = CircleBundleSpec::flat(1, 16);
    DiffOp d = multiplication_op(std::vector<Mat>(16, Mat::Zero(1, 1)));
    DiscreteOperator op = assemble(d, spec, 1);  // 3x3 zero matrix
    ResolventReport r = resolvent_check(op, rng);
    CHECK(r.norm_plus == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.norm_minus == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.identity_residual < 1e-10);
  }
  SUBCASE("constant 3 potential") {
    auto spec = CircleBundleSpec::flat(1, 16);
    DiffOp d = multiplication_op(std::vector<Mat>(16, 3.0 * Mat::Identity(1, 1)));
    DiscreteOperator op = assemble(d, spec, 1);
    ResolventReport r = resolvent_check(op, rng);
    CHECK(r.norm_plus == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));
  }
  SUBCASE("random Hermitian 50x50 surrogate via the singular-value oracle") {
    // random Hermitian through a multiplication operator on rank 5
    auto spec = CircleBundleSpec::flat(5, 64);
    Mat W(5, 5);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) W(r, c) = rng.cnormal();
    Mat V = 0.5 * (W + W.adjoint());
    DiffOp d = multiplication_op(std::vector<Mat>(64, V));
    DiscreteOperator op = assemble(d, spec, 4);
    ResolventReport r = resolvent_check(op, rng);
    // oracle: 1/min singular value of (white + i I)
    const Eigen::Index dim = op.basis.dim();
    Mat shifted = op.white + kI * Mat::Identity(dim, dim);
    auto sv = singular_values(shifted);
    CHECK(r.norm_plus == doctest::Approx(1.0 / sv.back()).epsilon(1e-10));
    CHECK(r.norm_plus <= 1.0 + 1e-12);
    CHECK(r.norm_minus <= 1.0 + 1e-12);
    CHECK(r.identity_residual < 1e-10);
  }
  SUBCASE("corrupted white matrix raises the impossible-for-Hermitian error") {
    auto spec = CircleBundleSpec::flat(1, 16);
    DiscreteOperator op = assemble(dirac(1, 16), spec, 2);
    op.white(0, 0) = cxd(0, -1);  // plants eigenvalue at -i
    CHECK_THROWS_AS(resolvent_check(op, rng), numeric_error);
  }
}

TEST_CASE("projection and synthesis round-trip band-limited sections") {
  auto spec = CircleBundleSpec::flat(1, 64);
  DiscreteOperator op = assemble(dirac(1, 64), spec, 10);
  Rng rng(77);
  Section u = random_band_limited(1, 64, 10, rng);
  Vec c = project_section(u, spec, op);
  Section back = synthesize(c, spec, op.basis);
  CHECK((back.samples - u.samples).cwiseAbs().maxCoeff() < 1e-10);
  // whitened norm equals the weighted L2 norm
  Vec w = op.to_white(c);
  CHECK(w.norm() == doctest::Approx(l2_norm(u, spec)).epsilon(1e-10));
}

TEST_CASE("weighted spec keeps the gram positive definite and hermitian whitening") {
  const int N = 64;
  std::vector<Mat> H(N);
  RVec f(N);
  for (int j = 0; j < N; ++j) {
    double th = kTwoPi * j / N;
    Mat h(1, 1);
    h << 1.0 + 0.3 * std::cos(th);
    H[j] = h;
    f[j] = 1.0 + 0.4 * std::sin(th);
  }
  CircleBundleSpec spec(1, N, 2.0, std::move(H), std::move(f));
  DiffOp d = multiplication_op([&] {
    std::vector<Mat> V(N);
    for (int j = 0; j < N; ++j) V[j] = std::cos(kTwoPi * j / N) * Mat::Identity(1, 1);
    return V;
  }());
  DiscreteOperator op = assemble(d, spec, 8);
  CHECK(op.hermiticity_residual < 1e-10);
  Eigen::SelfAdjointEigenSolver<Mat> es(op.gram);
  CHECK(es.eigenvalues().minCoeff() > 0);
}
