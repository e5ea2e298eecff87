#include <doctest.h>

#include "khom/geometry.hpp"

using namespace khom;

TEST_CASE("inner product of constants against the flat spec is 2 pi") {
  auto spec = CircleBundleSpec::flat(1, 64);
  Section u = Section::mode(1, 64, 0);
  CHECK(std::abs(inner_product(u, u, spec) - cxd(kTwoPi, 0)) < 1e-12);
}

TEST_CASE("distinct modes are orthogonal") {
  auto spec = CircleBundleSpec::flat(1, 64);
  Section u = Section::mode(1, 64, 1);
  Section v = Section::mode(1, 64, 0);
  CHECK(std::abs(inner_product(u, v, spec)) < 1e-12);
}

TEST_CASE("cosine density integrates away over the period") {
  const int N = 64;
  std::vector<Mat> H(N, Mat::Identity(1, 1));
  RVec f(N);
  for (int j = 0; j < N; ++j) f[j] = 1.0 + 0.5 * std::cos(kTwoPi * j / N);
  CircleBundleSpec spec(1, N, 2.0, std::move(H), std::move(f));
  Section u = Section::mode(1, N, 0);
  CHECK(std::abs(inner_product(u, u, spec) - cxd(kTwoPi, 0)) < 1e-10);
}

TEST_CASE("inner product is conjugate symmetric and positive") {
  auto spec = CircleBundleSpec::flat(2, 64);
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    Section u = random_band_limited(2, 64, 10, rng);
    Section v = random_band_limited(2, 64, 10, rng);
    cxd a = inner_product(u, v, spec);
    cxd b = inner_product(v, u, spec);
    CHECK(std::abs(a - std::conj(b)) < 1e-12);
    CHECK(inner_product(u, u, spec).real() > 0);
  }
  Section z = Section::zero(2, 64);
  CHECK(std::abs(inner_product(z, z, spec)) == 0.0);
}

TEST_CASE("inner product rejects dimension mismatch") {
  auto spec = CircleBundleSpec::flat(1, 64);
  Section u = Section::mode(2, 64, 0);
  CHECK_THROWS_AS(inner_product(u, u, spec), input_error);
}

TEST_CASE("spec invariants are enforced") {
  CHECK_THROWS_AS(CircleBundleSpec::flat(1, 7), input_error);   // odd
  CHECK_THROWS_AS(CircleBundleSpec::flat(1, 4), input_error);   // too small
  CHECK_THROWS_AS(CircleBundleSpec::flat(0, 64), input_error);  // rank

  // density above L
  std::vector<Mat> H(16, Mat::Identity(1, 1));
  RVec f = RVec::Constant(16, 3.0);
  CHECK_THROWS_AS(CircleBundleSpec(1, 16, 2.0, H, f), input_error);
  // non-Hermitian metric
  std::vector<Mat> H2(16, Mat::Identity(1, 1));
  H2[3](0, 0) = cxd(1.0, 0.5);
  CHECK_THROWS_AS(CircleBundleSpec(1, 16, 2.0, H2, RVec::Ones(16)), input_error);
}

TEST_CASE("fourier sobolev norm on pure modes") {
  Section u0 = Section::mode(1, 64, 0);
  CHECK(sobolev_norm_fourier(u0) == doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));
  Section u1 = Section::mode(1, 64, 1);
  CHECK(sobolev_norm_fourier(u1) == doctest::Approx(std::sqrt(2 * kTwoPi)).epsilon(1e-12));
  Section u3 = Section::mode(1, 64, 3);
  CHECK(sobolev_norm_fourier(u3) == doctest::Approx(std::sqrt(10 * kTwoPi)).epsilon(1e-12));
}

TEST_CASE("fourier cache matches a direct DFT") {
  Rng rng(5);
  Section u = random_band_limited(1, 32, 8, rng);
  const Mat& c = u.coeffs();
  for (int m = -8; m <= 8; ++m) {
    cxd direct(0, 0);
    for (int j = 0; j < 32; ++j)
      direct += u.samples(0, j) * std::exp(-kI * static_cast<double>(m) * (kTwoPi * j / 32.0));
    direct /= 32.0;
    CHECK(std::abs(c(0, index_of_mode(m, 32)) - direct) < 1e-12);
  }
}

TEST_CASE("partition of unity: defaults") {
  const int N = 256;
  Atlas2 atlas = make_partition(N);
  for (int j = 0; j < N; ++j) {
    double sum = atlas.rho[0][j] + atlas.rho[1][j];
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(atlas.rho[0][j] >= 0.0);
    CHECK(atlas.rho[0][j] <= 1.0);
  }
  // support: rho_i vanishes off its arc
  for (int j = 0; j < N; ++j) {
    double th = kTwoPi * j / N;
    for (int arc = 0; arc < 2; ++arc)
      if (!atlas.contains(arc, th)) CHECK(atlas.rho[arc][j] == 0.0);
  }
}

TEST_CASE("partition of unity: deep interior and overlap midpoint") {
  const int N = 256;
  Atlas2 atlas = make_partition(N, 0.6);
  int deep = static_cast<int>(std::lround((M_PI / 2) * N / kTwoPi));
  CHECK(atlas.rho[0][deep] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(atlas.rho[1][deep] == 0.0);
  int mid = static_cast<int>(std::lround(M_PI * N / kTwoPi));
  CHECK(atlas.rho[0][mid] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(atlas.rho[1][mid] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("partition rejects non-covering arcs") {
  CHECK_THROWS_AS(make_partition(64, 0.1, 1.0, 2.0, 3.0), input_error);
}

TEST_CASE("chart sobolev norm: zero and constant sections") {
  auto spec = CircleBundleSpec::flat(1, 256);
  Atlas2 atlas = make_partition(256);
  Section z = Section::zero(1, 256);
  CHECK(sobolev_norm_chart(z, atlas, spec) == 0.0);

  Section c = Section::mode(1, 256, 0);
  double s1 = sobolev_norm_chart(c, atlas, spec);
  double l2 = l2_norm(c, spec);
  CHECK(s1 >= l2 / std::sqrt(2.0 * spec.L));
}

TEST_CASE("chart/fourier norm ratio stays in the frozen regression interval") {
  auto spec = CircleBundleSpec::flat(1, 256);
  Atlas2 atlas = make_partition(256);
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    Section u = random_band_limited(1, 256, 40, rng);
    double ratio = sobolev_norm_chart(u, atlas, spec) / sobolev_norm_fourier(u);
    CHECK(ratio > 1.2);   // 1/c2, swept and frozen
    CHECK(ratio < 1.6);   // c1, swept and frozen
  }
}

TEST_CASE("l2 vs chart norm inequality over random sections") {
  auto spec = CircleBundleSpec::flat(1, 256);
  Atlas2 atlas = make_partition(256);
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    Section u = random_band_limited(1, 256, 30, rng);
    CHECK(l2_norm(u, spec) <= std::sqrt(2.0 * spec.L) * sobolev_norm_chart(u, atlas, spec));
  }
}

TEST_CASE("fourier sobolev norm dominates the flat l2 norm") {
  Rng rng(31);
  auto spec = CircleBundleSpec::flat(1, 128);
  for (int t = 0; t < 20; ++t) {
    Section u = random_band_limited(1, 128, 20, rng);
    CHECK(sobolev_norm_fourier(u) >= l2_norm(u, spec) - 1e-12);
  }
}

TEST_CASE("arc bump is supported in its arc") {
  RVec b = arc_bump(256, M_PI, 0.5);
  for (int j = 0; j < 256; ++j) {
    double d = kTwoPi * j / 256 - M_PI;
    d -= kTwoPi * std::round(d / kTwoPi);
    if (std::abs(d) >= 0.25) CHECK(b[j] == 0.0);
  }
  CHECK(b.maxCoeff() > 0.5);
}
