#include <doctest.h>

#include "khom/funcalc.hpp"
#include "khom/harmonic.hpp"

using namespace khom;

namespace {

DiscreteOperator hand_operator(const Mat& white) {
  DiscreteOperator op;
  op.basis = ModeBasis{0, static_cast<int>(white.rows())};
  op.white = white;
  op.gram = kTwoPi * Mat::Identity(white.rows(), white.cols());
  op.chol_R = std::sqrt(kTwoPi) * Mat::Identity(white.rows(), white.cols());
  op.galerkin = kTwoPi * white;
  return op;
}

DiscreteOperator dirac_operator(int M, int N = 0) {
  if (N == 0) N = std::max(4 * M, 16);
  auto spec = CircleBundleSpec::flat(1, N);
  return assemble(dirac(1, N), spec, M);
}

}  // namespace

TEST_CASE("identity function reproduces the operator") {
  DiscreteOperator op = dirac_operator(8);
  Mat h = func_calc(op, [](double x) { return cxd(x, 0); });
  CHECK((h - op.white).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("constant one gives the identity matrix") {
  DiscreteOperator op = dirac_operator(6);
  Mat h = func_calc(op, [](double) { return cxd(1, 0); });
  CHECK((h - Mat::Identity(13, 13)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("norm of h(H) is the max of h on the spectrum") {
  Mat w(2, 2);
  w << 1, 0, 0, 2;
  DiscreteOperator op = hand_operator(w);
  Mat h = func_calc(op, [](double x) { return cxd(x * x, 0); });
  CHECK(op_norm(h) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("functional calculus basics: self-adjoint, positive, unitary") {
  DiscreteOperator op = dirac_operator(8);
  Mat real_h = func_calc(op, [](double x) { return cxd(std::tanh(x), 0); });
  CHECK(op_norm(real_h - real_h.adjoint()) < 1e-12);

  Mat pos_h = func_calc(op, [](double x) { return cxd(x * x + 0.5, 0); });
  Eigen::SelfAdjointEigenSolver<Mat> es(pos_h);
  CHECK(es.eigenvalues().minCoeff() > 0);

  Mat uni = func_calc(op, [](double x) { return std::exp(kI * x); });
  CHECK(op_norm((uni.adjoint() * uni - Mat::Identity(17, 17)).eval()) < 1e-12);
}

TEST_CASE("homomorphism property on the spectrum") {
  DiscreteOperator op = dirac_operator(8);
  auto h1 = [](double x) { return cxd(1.0 / (1.0 + x * x), 0); };
  auto h2 = [](double x) { return std::exp(kI * 0.3 * x); };
  Mat lhs = func_calc(op, [&](double x) { return h1(x) * h2(x); });
  Mat rhs = func_calc(op, h1) * func_calc(op, h2);
  CHECK(op_norm(lhs - rhs) < 1e-9);
}

TEST_CASE("non-finite h at an eigenvalue is rejected with the eigenvalue named") {
  DiscreteOperator op = dirac_operator(4);
  try {
    // sqrt is NaN on the negative half of the spectrum
    func_calc(op, [](double x) { return cxd(std::sqrt(x), 0); });
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
  }
}

TEST_CASE("strong-convergence surrogate: h_n -> id monotonically on a vector") {
  DiscreteOperator op = dirac_operator(12);
  Rng rng(9);
  Vec v = rng.cnormal_vec(25);
  v /= v.norm();
  double prev = std::numeric_limits<double>::infinity();
  for (double n : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    Mat hn = func_calc(op, [n](double x) { return cxd(x / (1.0 + x * x / n), 0); });
    double dev = (hn * v - op.white * v).norm();
    CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("cayley of small hand matrices") {
  DiscreteOperator z = hand_operator(Mat::Zero(1, 1));
  Mat u0 = cayley(z);
  CHECK(std::abs(u0(0, 0) - cxd(-1, 0)) < 1e-14);

  DiscreteOperator one = hand_operator(Mat::Identity(1, 1));
  Mat u1 = cayley(one);
  CHECK(std::abs(u1(0, 0) - kI) < 1e-14);
}

TEST_CASE("cayley spectrum of dirac and distance to 1") {
  DiscreteOperator op = dirac_operator(16, 64);
  Mat u = cayley(op);
  CHECK(op_norm((u.adjoint() * u - Mat::Identity(33, 33)).eval()) < 1e-10);
  // spectrum = c(m) for m = -16..16
  Eigen::ComplexEigenSolver<Mat> es(u);
  double mind = 1e9;
  for (int i = 0; i < 33; ++i) {
    cxd lam = es.eigenvalues()[i];
    double best = 1e9;
    for (int m = -16; m <= 16; ++m) best = std::min(best, std::abs(lam - cayley_scalar(m)));
    CHECK(best < 1e-9);
    mind = std::min(mind, std::abs(lam - cxd(1, 0)));
  }
  CHECK(mind == doctest::Approx(std::abs(cayley_scalar(16) - cxd(1, 0))).epsilon(1e-8));
  CHECK(mind > 0);
}

TEST_CASE("cayley round-trips both ways") {
  DiscreteOperator op = dirac_operator(8);
  Mat u = cayley(op);
  InverseCayleyResult inv = inverse_cayley(u);
  CHECK(op_norm(inv.hermitian - op.white) < 1e-9);
  // forward again
  DiscreteOperator back = hand_operator(0.5 * (inv.hermitian + inv.hermitian.adjoint().eval()));
  Mat u2 = cayley(back);
  CHECK(op_norm(u2 - u) < 1e-9);
  // min singular value of U - 1 stays positive
  auto sv = singular_values(u - Mat::Identity(17, 17));
  CHECK(sv.back() > 0);
}

TEST_CASE("inverse cayley refuses a unitary with eigenvalue 1") {
  Mat id = Mat::Identity(3, 3);
  CHECK_THROWS_AS(inverse_cayley(id), input_error);
}

TEST_CASE("unitary group basics") {
  DiscreteOperator op = dirac_operator(10);
  const Eigen::Index d = 21;
  CHECK(op_norm(unitary_group(op, 0.0) - Mat::Identity(d, d)) < 1e-13);

  Mat a = unitary_group(op, 0.2), b = unitary_group(op, 0.35), ab = unitary_group(op, 0.55);
  CHECK(op_norm(a * b - ab) < 1e-10);
  Mat am = unitary_group(op, -0.2);
  CHECK(op_norm(a * am - Mat::Identity(d, d)) < 1e-11);
  CHECK(op_norm((a.adjoint() * a - Mat::Identity(d, d)).eval()) < 1e-11);
}

TEST_CASE("dirac group action is the circle rotation (fourier phase oracle)") {
  const int N = 64, M = 10;
  auto spec = CircleBundleSpec::flat(1, N);
  DiscreteOperator op = assemble(dirac(1, N), spec, M);
  double s = 0.37;
  Mat es = unitary_group(op, s, false);  // e^{i s H}
  // oracle: in the mode basis the action is the diagonal phase e^{i s m}
  Mat oracle = Mat::Zero(2 * M + 1, 2 * M + 1);
  for (int m = -M; m <= M; ++m)
    oracle(m + M, m + M) = std::exp(kI * s * static_cast<double>(m));
  CHECK(op_norm(es - oracle) < 1e-9);
}

TEST_CASE("graded commutation: 2x2 anticommuting pair") {
  Mat h(2, 2);
  h << 0, 1, 1, 0;
  Mat t(2, 2);
  t << 1, 0, 0, -1;
  DiscreteOperator op = hand_operator(h);

  SUBCASE("even polynomial commutes") {
    auto rep = graded_commutation_check(op, t, [](double x) { return cxd(x * x, 0); });
    CHECK(rep.even_residual < 1e-13);
    CHECK(rep.odd_residual < 1e-13);
  }
  SUBCASE("odd polynomial anticommutes") {
    auto rep = graded_commutation_check(op, t, [](double x) { return cxd(x * x * x, 0); });
    CHECK(rep.odd_residual < 1e-13);
    // the even part of x^3 vanishes, so both residuals collapse
    CHECK(rep.even_residual < 1e-13);
  }
  SUBCASE("exponential splits into cosh and sinh parts") {
    auto rep = graded_commutation_check(op, t, [](double x) { return cxd(std::exp(x), 0); });
    CHECK(rep.even_residual < 1e-12);
    CHECK(rep.odd_residual < 1e-12);
  }
  SUBCASE("violated hypothesis is refused with the measured norm") {
    Mat bad = Mat::Identity(2, 2);
    CHECK_THROWS_AS(
        graded_commutation_check(op, bad, [](double x) { return cxd(x, 0); }),
        precondition_error);
  }
}

TEST_CASE("function presets evaluate to their closed forms") {
  ScalarFn id = parse_function_preset("id");
  CHECK(id(1.5) == cxd(1.5, 0));
  ScalarFn sr = parse_function_preset("sqrt_rational");
  CHECK(std::abs(sr(1.0) - cxd(1.0 / std::sqrt(2.0), 0)) < 1e-15);
  ScalarFn sm = parse_function_preset("sign_smooth:2");
  CHECK(std::abs(sm(2.0) - cxd(2.0 / std::sqrt(8.0), 0)) < 1e-15);
  ScalarFn cy = parse_function_preset("cayley");
  CHECK(std::abs(cy(0.0) - cxd(-1, 0)) < 1e-15);

  NormalizingFn chi = NormalizingFn::build(0.0, NormalizingFn::Tag::arctan);
  std::map<std::string, const NormalizingFn*> reg{{"a", &chi}};
  ScalarFn viachi = parse_function_preset("chi:a", reg);
  CHECK(std::abs(viachi(1.0) - cxd(0.5, 0)) < 1e-15);

  CHECK_THROWS_AS(parse_function_preset("nope"), input_error);
  CHECK_THROWS_AS(parse_function_preset("chi:missing", reg), input_error);
  CHECK_THROWS_AS(parse_function_preset("sign_smooth:-1"), input_error);
}
