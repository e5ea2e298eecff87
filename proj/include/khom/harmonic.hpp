#pragma once

#include "khom/funcalc.hpp"
#include "khom/quadrature.hpp"

#include <array>
#include <functional>
#include <memory>

namespace khom {

/// Test function on the line with derivative access and declared support.
struct TestFunction {
  std::function<double(double)> f;
  std::array<std::function<double(double)>, 4> deriv;  // orders 1..4
  double support_radius = 0.0;  // ignored when rapid_decay
  bool rapid_decay = false;
  double window = 1.0;  // quadrature window [-window, window]
  double step = 1e-3;   // sampling step for sup-norm style scans

  double operator()(double x) const { return f(x); }
  double d(int order, double x) const { return deriv[order - 1](x); }
};

/// Standard bump amplitude * exp(-1/(1-((x-center)/radius)^2)), derivatives
/// supplied by high-order finite differences of the smooth closed form.
TestFunction bump_test(double center, double radius, double amplitude = 1.0);

/// x * bump(x); kills the principal-value pole in pairings.
TestFunction odd_bump_test(double radius, double amplitude = 1.0);

/// Schwartz seminorm sup (1+|x|)^N |phi^(alpha)| scanned over the window.
double seminorm(const TestFunction& phi, int n, int alpha);

/// Quadrature convolution; both compactly supported or one rapid-decay.
TestFunction convolve(const TestFunction& f, const TestFunction& g);

/// pv(h(t)/t) for an even integrable profile h.
struct PrincipalValue {
  std::function<cxd(double)> h;
  double support_radius;
  int panels = 64;
};

/// Regularized pairing  int (phi(t) - phi(0))/t h(t) dt.  Enforces the
/// mean-value bound |value| <= ||h||_L1 sup|phi'| as a quadrature sanity check.
cxd pv_pair(const PrincipalValue& p, const TestFunction& phi);

/// zeta(x) = int sin(tx)/(i t) h(t/2pi) dt, the density of the Fourier
/// transform of pv(h(t)/t).
cxd pv_fourier(const PrincipalValue& p, double x);

/// L1 norm of the profile by quadrature.
double pv_profile_l1(const PrincipalValue& p);

/// Normalizing function: smooth odd chi: R -> [-1,1], positive on (0,inf),
/// asymptotic to +-1. The "gg-bump" construction follows f = g*g with
/// f(0) = 1/pi, chi(x) = int sin(xt)/t f(t) dt, rescaled so the
/// distributional Fourier transform is supported in (-epsilon, epsilon).
class NormalizingFn {
 public:
  enum class Tag { gg_bump, x_over_sqrt, arctan };

  static Tag parse_tag(const std::string& name);
  static std::string tag_name(Tag t);

  /// build_normalizing: construct chi for the given tag; epsilon is the
  /// Fourier support bound and only meaningful for gg_bump.
  static NormalizingFn build(double epsilon, Tag tag);

  double operator()(double x) const;        // exact evaluation
  double table_eval(double x) const;        // cubic interpolation + asymptote
  Tag tag() const { return tag_; }
  bool band_limited() const { return tag_ == Tag::gg_bump; }
  double epsilon() const { return epsilon_; }
  /// Actual support radius bound of the distributional Fourier transform.
  double fourier_support_radius() const;

  /// <chi_hat, w> for a smooth bounded w, via the regularized pv pairing
  /// -i int [w(eps t / (2 pi b)) - w(0)] f(t)/t dt over the support of f.
  cxd pair_fourier(const std::function<cxd(double)>& w) const;

  /// Second construction formula pi * int_{-x/2pi}^{x/2pi} ghat(t)^2 dt
  /// (gg_bump only; equals chi of the unscaled argument for x >= 0).
  double ghat_form(double x_unscaled) const;
  double sin_form(double x_unscaled) const;
  double max_formula_disagreement() const { return formula_disagreement_; }

  const std::vector<double>& table_x() const { return table_x_; }
  const std::vector<double>& table_chi() const { return table_chi_; }
  double table_edge_value() const { return table_chi_.empty() ? 1.0 : table_chi_.back(); }

  ScalarFn as_scalar_fn() const;

 private:
  Tag tag_ = Tag::x_over_sqrt;
  double epsilon_ = 0.0;
  double bump_radius_ = 1.0;         // a
  double bandwidth_ = 2.0;           // b = 2a
  double scale_ = 1.0;               // g = scale * standard bump
  GaussRule f_rule_;                 // nodes/weights on [-2a, 2a]
  std::vector<double> f_vals_;       // f = g*g at the nodes
  GaussRule g_rule_;                 // nodes/weights on [-a, a]
  std::vector<double> g_vals_;
  double formula_disagreement_ = 0.0;
  std::vector<double> table_x_, table_chi_;

  double chi_unscaled(double x) const;
};

/// Friedrichs mollifier on the periodic grid: convolution by the scaled
/// standard bump, grid-normalized so the kernel integrates to exactly 1.
struct Mollifier {
  double a;        // profile support radius before scaling
  double t;        // scale; kernel support radius is a*t
  int N;
  RVec kernel;     // grid samples
  Vec multiplier;  // DFT eigenvalues of the circulant (FFT order)
};

Mollifier make_mollifier(double a, double t, int N);

Section mollify(const Mollifier& mol, const Section& u);

struct MollifierSuiteReport {
  double max_norm_ratio;                 // max ||F_t u|| / ||u|| over probes
  std::vector<double> operator_norms;    // per t: max |multiplier|
  std::vector<std::vector<double>> convergence;  // per probe: ||F_t u - u|| along ladder
  bool norms_bounded;       // max_norm_ratio <= 1 + 1e-8
  bool strictly_decreasing; // every probe's deviation decreases along the ladder
};

MollifierSuiteReport mollifier_suite(double a, const std::vector<double>& t_ladder, int N,
                                     int n_random, int band, Rng& rng);

struct CommutatorBoundReport {
  std::vector<double> t_ladder;
  std::vector<double> numeric_norms;  // ||[f d/dtheta, F_t]|| on the grid
  double schur_bound;                 // C (a ||phi'||_1 + ||phi||_1)
  double derivative_bound;            // C
  double variation;                   // (max - min)/min across the ladder
  bool verdict;                        // numeric <= bound at every t
};

/// Commutator of the scalar first-order operator f(theta) d/dtheta with the
/// mollifier family, against the kernel bound from Schur's test.
CommutatorBoundReport mollifier_commutator_bound(double a, const std::vector<double>& t_ladder,
                                                 const RVec& f_scalar, int N,
                                                 double derivative_bound = -1.0);

/// Band-limited function with an explicitly known Fourier transform density.
struct BandLimitedFn {
  ScalarFn psi;
  std::function<cxd(double)> psi_hat;
  double hat_radius;
};

/// Fejer pair: psi(x) = w sinc^2(pi w x) with psi_hat the tent on [-w, w].
BandLimitedFn fejer_pair(double w);

struct Lemma1035Report {
  cxd lhs;  // <psi(Hhat) u, v>
  cxd rhs;  // <psi_hat, s -> <e^{2 pi i s Hhat} u, v>>
  double residual;
};

/// Spectral identity: pairing the Fourier transform of psi against the
/// matrix-group coefficient s -> <e^{2 pi i s Hhat} u, v>.
Lemma1035Report lemma_10_3_5_check(const DiscreteOperator& op, const NormalizingFn& chi,
                                   const Vec& u_white, const Vec& v_white);
Lemma1035Report lemma_10_3_5_check(const DiscreteOperator& op, const BandLimitedFn& psi,
                                   const Vec& u_white, const Vec& v_white, int panels = 256);

}  // namespace khom
