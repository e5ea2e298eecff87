#include "khom/geometry.hpp"
#include "khom/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace khom {

namespace {

double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  return y < 0 ? y + kTwoPi : y;
}

// angle theta lifted into [lo, lo + 2*pi)
double lift_above(double theta, double lo) {
  double y = theta;
  while (y < lo) y += kTwoPi;
  while (y >= lo + kTwoPi) y -= kTwoPi;
  return y;
}

}  // namespace

CircleBundleSpec::CircleBundleSpec(int k_, int N_, double L_, std::vector<Mat> H_, RVec f_) {
  k = k_;
  N = N_;
  L = L_;
  H = std::move(H_);
  f = std::move(f_);
  validate_and_factor();
}

CircleBundleSpec CircleBundleSpec::flat(int k, int N, double L) {
  std::vector<Mat> H(N, Mat::Identity(k, k));
  return CircleBundleSpec(k, N, L, std::move(H), RVec::Ones(N));
}

int CircleBundleSpec::nearest_sample(double theta) const {
  double t = wrap_2pi(theta);
  int j = static_cast<int>(std::lround(t * N / kTwoPi));
  return j % N;
}

void CircleBundleSpec::validate_and_factor() {
  if (k < 1) throw input_error("CircleBundleSpec: rank must be positive");
  if (N < 8 || N % 2 != 0) throw input_error("CircleBundleSpec: N must be even and >= 8");
  if (L <= 0) throw input_error("CircleBundleSpec: L must be positive");
  if (static_cast<int>(H.size()) != N || f.size() != N)
    throw input_error("CircleBundleSpec: H and f must hold one entry per sample");
  chol_.resize(N);
  for (int j = 0; j < N; ++j) {
    const Mat& Hj = H[j];
    if (Hj.rows() != k || Hj.cols() != k)
      throw input_error("CircleBundleSpec: fiber metric has wrong dimensions");
    if ((Hj - Hj.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw input_error("CircleBundleSpec: fiber metric not Hermitian at sample " +
                        std::to_string(j));
    if (f[j] <= 0) throw input_error("CircleBundleSpec: density must be positive");
    if (f[j] > L || 1.0 / f[j] > L)
      throw input_error("CircleBundleSpec: density violates the bound L at sample " +
                        std::to_string(j));
    Eigen::SelfAdjointEigenSolver<Mat> es(Hj);
    if (es.eigenvalues().minCoeff() <= 0)
      throw input_error("CircleBundleSpec: fiber metric not positive definite at sample " +
                        std::to_string(j));
    Eigen::LLT<Mat> llt(Hj);
    if (llt.info() != Eigen::Success)
      throw numeric_error("CircleBundleSpec: Cholesky factorization failed");
    chol_[j] = llt.matrixL().adjoint();  // H = R^dagger R with R upper
  }
}

Section Section::mode(int k, int N, int m, int comp, cxd amplitude) {
  Mat s = Mat::Zero(k, N);
  for (int j = 0; j < N; ++j) {
    double th = kTwoPi * j / N;
    s(comp, j) = amplitude * std::exp(kI * static_cast<double>(m) * th);
  }
  return Section(std::move(s));
}

const Mat& Section::coeffs() const {
  if (!fourier_) {
    Mat c(samples.rows(), samples.cols());
    for (Eigen::Index r = 0; r < samples.rows(); ++r)
      c.row(r) = dft_coefficients(samples.row(r).transpose()).transpose();
    fourier_ = std::move(c);
  }
  return *fourier_;
}

double smooth_ramp(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  static const double total = [] {
    GaussRule r = gauss_rule(0.0, 1.0, 8, 16);
    return r.integrate([](double t) { return std::exp(-1.0 / (t * (1.0 - t))); });
  }();
  GaussRule r = gauss_rule(0.0, s, 4, 16);
  double v = r.integrate([](double t) {
    double d = t * (1.0 - t);
    return d > 0 ? std::exp(-1.0 / d) : 0.0;
  });
  return v / total;
}

RVec arc_bump(int N, double center, double width) {
  RVec v = RVec::Zero(N);
  for (int j = 0; j < N; ++j) {
    double th = kTwoPi * j / N;
    double d = th - center;
    d = d - kTwoPi * std::round(d / kTwoPi);  // wrapped distance in (-pi, pi]
    if (std::abs(d) < width / 2) {
      double a = (d + width / 2) / (width / 2);
      double b = (width / 2 - d) / (width / 2);
      v[j] = smooth_ramp(a) * smooth_ramp(b);
    }
  }
  return v;
}

bool Atlas2::contains(int arc, double theta) const {
  double t = lift_above(theta, lo[arc]);
  return t > lo[arc] && t < hi[arc];
}

Atlas2 make_partition(int N, double lo1, double hi1, double lo2, double hi2) {
  Atlas2 atlas;
  atlas.N = N;
  atlas.lo[0] = lo1;
  atlas.hi[0] = hi1;
  atlas.lo[1] = lo2;
  atlas.hi[1] = hi2;
  if (hi1 <= lo1 || hi2 <= lo2 || hi1 - lo1 >= kTwoPi || hi2 - lo2 >= kTwoPi)
    throw input_error("make_partition: arcs must be proper nonempty intervals");

  // Raw windows: smooth ramps over each arc, wrapped.
  RVec raw[2];
  for (int i = 0; i < 2; ++i) {
    raw[i] = RVec::Zero(N);
    double width = atlas.hi[i] - atlas.lo[i];
    // Ramp width: half the overlap at each junction; for generic arcs use a
    // quarter of the arc, capped so ramps never meet in the middle.
    for (int j = 0; j < N; ++j) {
      double th = lift_above(kTwoPi * j / N, atlas.lo[i]);
      if (th <= atlas.lo[i] || th >= atlas.hi[i]) continue;
      double dlo = th - atlas.lo[i];
      double dhi = atlas.hi[i] - th;
      double rw = width / 4;
      raw[i][j] = smooth_ramp(dlo / (2 * rw)) * smooth_ramp(dhi / (2 * rw));
    }
  }
  RVec total = raw[0] + raw[1];
  for (int j = 0; j < N; ++j)
    if (total[j] <= 0)
      throw input_error("make_partition: arcs fail to cover sample " + std::to_string(j));
  for (int i = 0; i < 2; ++i) atlas.rho[i] = raw[i].cwiseQuotient(total);
  return atlas;
}

Atlas2 make_partition(int N, double overlap) {
  if (overlap <= 0) throw input_error("make_partition: overlap must be positive");
  return make_partition(N, -overlap, M_PI + overlap, M_PI - overlap, kTwoPi + overlap);
}

cxd inner_product(const Section& u, const Section& v, const CircleBundleSpec& spec) {
  if (u.k() != spec.k || u.N() != spec.N || v.k() != spec.k || v.N() != spec.N)
    throw input_error("inner_product: section does not conform to spec");
  cxd acc(0, 0);
  for (int j = 0; j < spec.N; ++j)
    acc += spec.f[j] * (v.samples.col(j).adjoint() * spec.H[j] * u.samples.col(j))(0, 0);
  return acc * (kTwoPi / spec.N);
}

double sobolev_norm_chart(const Section& u, const Atlas2& atlas,
                          const CircleBundleSpec& spec) {
  if (u.k() != spec.k || u.N() != spec.N || atlas.N != spec.N)
    throw input_error("sobolev_norm_chart: dimensions do not match");
  const double w = kTwoPi / spec.N;
  double total = 0.0;
  for (int arc = 0; arc < 2; ++arc) {
    // Windowed, fiberwise-isometrically trivialized section on the full grid
    // (zero off the arc), differentiated spectrally.
    Mat windowed(spec.k, spec.N);
    for (int j = 0; j < spec.N; ++j)
      windowed.col(j) = atlas.rho[arc][j] * (spec.trivialization(j) * u.samples.col(j));
    double term = 0.0;
    for (int r = 0; r < spec.k; ++r) {
      Vec row = windowed.row(r).transpose();
      Vec drow = spectral_derivative(row);
      term += w * (row.squaredNorm() + drow.squaredNorm());
    }
    total += std::sqrt(term);
  }
  return total;
}

double sobolev_norm_fourier(const Section& u) {
  const Mat& c = u.coeffs();
  const Eigen::Index n = c.cols();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = mode_of_index(i, n);
    acc += (1.0 + m * m) * c.col(i).squaredNorm();
  }
  return std::sqrt(kTwoPi * acc);
}

Section random_band_limited(int k, int N, int maxdeg, Rng& rng) {
  if (2 * maxdeg >= N) throw input_error("random_band_limited: degree too large for grid");
  Mat coeffs = Mat::Zero(k, N);
  for (int r = 0; r < k; ++r)
    for (int m = -maxdeg; m <= maxdeg; ++m)
      coeffs(r, index_of_mode(m, N)) = rng.cnormal();
  Mat s(k, N);
  for (int r = 0; r < k; ++r) s.row(r) = dft_synthesis(coeffs.row(r).transpose()).transpose();
  Section sec(std::move(s));
  double nrm = std::sqrt(kTwoPi / N * sec.samples.squaredNorm());
  sec.samples /= nrm;
  return sec;
}

}  // namespace khom
