#pragma once

#include "khom/common.hpp"
#include "khom/fourier.hpp"

#include <optional>

namespace khom {

/// Rank-k Hermitian bundle over the circle with weighted measure dmu = f dtheta,
/// sampled at theta_j = 2*pi*j/N. Density and its inverse are bounded by L.
struct CircleBundleSpec {
  int k = 1;
  int N = 256;
  double L = 2.0;
  std::vector<Mat> H;  // per-sample k x k fiber metric, Hermitian positive definite
  RVec f;              // per-sample density

  CircleBundleSpec() = default;
  CircleBundleSpec(int k, int N, double L, std::vector<Mat> H, RVec f);

  /// H = I, f = 1.
  static CircleBundleSpec flat(int k, int N, double L = 2.0);

  double theta(int j) const { return kTwoPi * j / N; }
  int nearest_sample(double theta) const;

  /// Upper Cholesky factor R(theta_j) with H = R^dagger R; the fiberwise
  /// isometric trivialization used by the chart Sobolev norm.
  const Mat& trivialization(int j) const { return chol_[j]; }

 private:
  std::vector<Mat> chol_;
  void validate_and_factor();
};

/// A section of the bundle: N complex k-vectors (column j = value at theta_j).
struct Section {
  Mat samples;  // k x N

  Section() = default;
  explicit Section(Mat s) : samples(std::move(s)) {}
  static Section zero(int k, int N) { return Section(Mat::Zero(k, N)); }
  /// e^{im theta} on fiber component `comp`.
  static Section mode(int k, int N, int m, int comp = 0, cxd amplitude = cxd(1, 0));

  int k() const { return static_cast<int>(samples.rows()); }
  int N() const { return static_cast<int>(samples.cols()); }

  /// Per-component DFT coefficients (FFT index order), cached on first use.
  const Mat& coeffs() const;
  void invalidate_cache() { fourier_.reset(); }

 private:
  mutable std::optional<Mat> fourier_;
};

/// Two-arc atlas with a smooth partition of unity subordinate to it.
struct Atlas2 {
  // Arc i is (lo[i], hi[i]) as angles; hi - lo < 2*pi, arcs overlap.
  double lo[2], hi[2];
  RVec rho[2];  // per-sample partition values, supp(rho_i) inside arc i
  int N = 0;

  bool contains(int arc, double theta) const;
};

/// Smooth 0->1 ramp built from the standard bump exp(-1/(t(1-t))); satisfies
/// ramp(s) + ramp(1-s) = 1.
double smooth_ramp(double s);

/// Bump section profile on an arc: product of smooth ramps, 1 near the
/// center, exactly 0 outside (center-width/2, center+width/2).
RVec arc_bump(int N, double center, double width);

/// Partition of unity for two overlapping arcs covering the circle.
Atlas2 make_partition(int N, double lo1, double hi1, double lo2, double hi2);
Atlas2 make_partition(int N, double overlap = 0.6);  // default symmetric atlas

/// Weighted inner product (2pi/N) sum_j f_j <u_j, v_j>_{H_j}, linear in u.
cxd inner_product(const Section& u, const Section& v, const CircleBundleSpec& spec);

inline double l2_norm(const Section& u, const CircleBundleSpec& spec) {
  return std::sqrt(std::abs(inner_product(u, u, spec).real()));
}

/// Chart-based Sobolev-1 norm: sum over charts of
/// sqrt(||R(rho_i u)||_2^2 + ||d/dtheta R(rho_i u)||_2^2) with flat measure
/// on the unwrapped arc.
double sobolev_norm_chart(const Section& u, const Atlas2& atlas, const CircleBundleSpec& spec);

/// Flat-measure Fourier Sobolev norm sqrt(2pi sum (1+m^2)|u_m|^2).
double sobolev_norm_fourier(const Section& u);

/// Random section band-limited to |m| <= maxdeg, unit flat L2 norm.
Section random_band_limited(int k, int N, int maxdeg, Rng& rng);

}  // namespace khom
