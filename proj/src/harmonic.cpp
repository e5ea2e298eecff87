#include "khom/harmonic.hpp"
#include "khom/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace khom {

namespace {

double std_bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

// Order-8 central finite difference of a smooth callable.
std::function<double(double)> fd8(std::function<double(double)> f, double h) {
  static const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  return [f = std::move(f), h](double x) {
    double acc = 0.0;
    for (int k = 1; k <= 4; ++k) acc += c[k - 1] * (f(x + k * h) - f(x - k * h));
    return acc / h;
  };
}

double scan_sup(const std::function<double(double)>& f, double lo, double hi, double step) {
  double s = 0.0;
  for (double x = lo; x <= hi; x += step) s = std::max(s, std::abs(f(x)));
  return s;
}

}  // namespace

TestFunction bump_test(double center, double radius, double amplitude) {
  TestFunction tf;
  tf.f = [center, radius, amplitude](double x) {
    return amplitude * std_bump((x - center) / radius);
  };
  double h = radius * 5e-3;
  tf.deriv[0] = fd8(tf.f, h);
  tf.deriv[1] = fd8(tf.deriv[0], h);
  tf.deriv[2] = fd8(tf.deriv[1], h * 2);
  tf.deriv[3] = fd8(tf.deriv[2], h * 2);
  tf.support_radius = radius;
  tf.rapid_decay = false;
  tf.window = std::abs(center) + radius + 1.0;
  tf.step = radius / 200.0;
  return tf;
}

TestFunction odd_bump_test(double radius, double amplitude) {
  TestFunction tf = bump_test(0.0, radius, amplitude);
  auto base = tf.f;
  tf.f = [base](double x) { return x * base(x); };
  double h = radius * 5e-3;
  tf.deriv[0] = fd8(tf.f, h);
  tf.deriv[1] = fd8(tf.deriv[0], h);
  tf.deriv[2] = fd8(tf.deriv[1], h * 2);
  tf.deriv[3] = fd8(tf.deriv[2], h * 2);
  return tf;
}

double seminorm(const TestFunction& phi, int n, int alpha) {
  if (alpha < 0 || alpha > 4) throw input_error("seminorm: derivative order out of range");
  auto g = alpha == 0 ? phi.f : phi.deriv[alpha - 1];
  double s = 0.0;
  for (double x = -phi.window; x <= phi.window; x += phi.step)
    s = std::max(s, std::pow(1.0 + std::abs(x), n) * std::abs(g(x)));
  return s;
}

TestFunction convolve(const TestFunction& f, const TestFunction& g) {
  if (f.rapid_decay && g.rapid_decay)
    throw input_error("convolve: both factors rapid-decay is unsupported");
  // Integrate over the factor with the smaller support.
  const TestFunction& small = (!f.rapid_decay && (g.rapid_decay || f.support_radius <= g.support_radius)) ? f : g;
  const TestFunction& big = (&small == &f) ? g : f;

  auto conv_order = [small, big](int order) {
    return [small, big, order](double x) {
      GaussRule r = gauss_rule(-small.support_radius, small.support_radius, 24, 16);
      double acc = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        double y = r.nodes[i];
        double bg = order == 0 ? big.f(x - y) : big.deriv[order - 1](x - y);
        acc += r.weights[i] * small.f(y) * bg;
      }
      return acc;
    };
  };

  TestFunction out;
  out.f = conv_order(0);
  for (int k = 1; k <= 4; ++k) out.deriv[k - 1] = conv_order(k);
  out.rapid_decay = big.rapid_decay;
  out.support_radius = big.rapid_decay ? 0.0 : small.support_radius + big.support_radius;
  out.window = small.window + big.window;
  out.step = std::min(small.step, big.step);
  return out;
}

namespace {

// The principal-value construction needs an even profile; enforce the type
// invariant at the quadrature nodes.
void check_even_profile(const PrincipalValue& p, const GaussRule& rule) {
  for (std::size_t i = 0; i < rule.nodes.size(); i += 7) {
    double t = rule.nodes[i];
    if (std::abs(p.h(t) - p.h(-t)) > 1e-12)
      throw input_error("PrincipalValue: profile is not even at t = " + std::to_string(t));
  }
}

}  // namespace

cxd pv_pair(const PrincipalValue& p, const TestFunction& phi) {
  const double r = p.support_radius;
  GaussRule rule = gauss_rule(-r, r, p.panels, 16);
  check_even_profile(p, rule);
  const double phi0 = phi.f(0.0);
  const double dphi0 = phi.deriv[0](0.0);
  const double ddphi0 = phi.deriv[1](0.0);
  cxd acc(0, 0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = rule.nodes[i];
    double quot;
    if (std::abs(t) < 1e-5 * r) {
      quot = dphi0 + 0.5 * t * ddphi0;
    } else {
      quot = (phi.f(t) - phi0) / t;
    }
    acc += rule.weights[i] * quot * p.h(t);
  }
  double bound = pv_profile_l1(p) * scan_sup(phi.deriv[0], -phi.window, phi.window, phi.step);
  if (std::abs(acc) > bound * (1.0 + 1e-6) + 1e-12)
    throw numeric_error("pv_pair: value violates the mean-value bound; quadrature failure");
  return acc;
}

cxd pv_fourier(const PrincipalValue& p, double x) {
  const double r = kTwoPi * p.support_radius;
  int panels = std::max(p.panels, static_cast<int>(std::ceil(std::abs(x) * p.support_radius * 2)) + 8);
  GaussRule rule = gauss_rule(-r, r, panels, 16);
  check_even_profile(p, gauss_rule(-p.support_radius, p.support_radius, p.panels, 16));
  cxd acc(0, 0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = rule.nodes[i];
    acc += rule.weights[i] * x * sinc(x * t) * p.h(t / kTwoPi);
  }
  return acc / kI;
}

double pv_profile_l1(const PrincipalValue& p) {
  GaussRule rule = gauss_rule(-p.support_radius, p.support_radius, p.panels, 16);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * std::abs(p.h(rule.nodes[i]));
  return acc;
}

NormalizingFn::Tag NormalizingFn::parse_tag(const std::string& name) {
  if (name == "gg-bump") return Tag::gg_bump;
  if (name == "x_over_sqrt") return Tag::x_over_sqrt;
  if (name == "arctan") return Tag::arctan;
  throw input_error("unknown normalizing-function tag: " + name);
}

std::string NormalizingFn::tag_name(Tag t) {
  switch (t) {
    case Tag::gg_bump: return "gg-bump";
    case Tag::x_over_sqrt: return "x_over_sqrt";
    case Tag::arctan: return "arctan";
  }
  return "?";
}

double NormalizingFn::chi_unscaled(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < f_rule_.nodes.size(); ++i) {
    double t = f_rule_.nodes[i];
    acc += f_rule_.weights[i] * f_vals_[i] * x * sinc(x * t);
  }
  return acc;
}

double NormalizingFn::sin_form(double x) const { return chi_unscaled(x); }

double NormalizingFn::ghat_form(double x) const {
  if (tag_ != Tag::gg_bump) throw precondition_error("ghat_form: gg-bump only");
  const double lim = x / kTwoPi;
  if (lim == 0.0) return 0.0;
  int panels = std::max(8, static_cast<int>(std::ceil(std::abs(lim) / 0.05)));
  GaussRule rule = gauss_rule(-std::abs(lim), std::abs(lim), panels, 16);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = rule.nodes[i];
    double gh = 0.0;
    for (std::size_t j = 0; j < g_rule_.nodes.size(); ++j)
      gh += g_rule_.weights[j] * g_vals_[j] * std::cos(kTwoPi * t * g_rule_.nodes[j]);
    acc += rule.weights[i] * gh * gh;
  }
  return (x >= 0 ? 1.0 : -1.0) * M_PI * acc;
}

NormalizingFn NormalizingFn::build(double epsilon, Tag tag) {
  if (epsilon <= 0 && tag == Tag::gg_bump)
    throw input_error("build_normalizing: epsilon must be positive");
  NormalizingFn fn;
  fn.tag_ = tag;
  fn.epsilon_ = epsilon;
  if (tag != Tag::gg_bump) return fn;

  const double a = fn.bump_radius_;
  fn.bandwidth_ = 2.0 * a;
  fn.g_rule_ = gauss_rule(-a, a, 32, 16);

  // Scale g so that (g*g)(0) = 1/pi.
  double i2 = 0.0;
  for (std::size_t i = 0; i < fn.g_rule_.nodes.size(); ++i) {
    double v = std_bump(fn.g_rule_.nodes[i] / a);
    i2 += fn.g_rule_.weights[i] * v * v;
  }
  fn.scale_ = 1.0 / std::sqrt(M_PI * i2);
  fn.g_vals_.resize(fn.g_rule_.nodes.size());
  for (std::size_t i = 0; i < fn.g_rule_.nodes.size(); ++i)
    fn.g_vals_[i] = fn.scale_ * std_bump(fn.g_rule_.nodes[i] / a);

  // f = g*g tabulated at the outer quadrature nodes.
  fn.f_rule_ = gauss_rule(-2 * a, 2 * a, 64, 16);
  fn.f_vals_.resize(fn.f_rule_.nodes.size());
  for (std::size_t i = 0; i < fn.f_rule_.nodes.size(); ++i) {
    double t = fn.f_rule_.nodes[i];
    double lo = std::max(-a, t - a), hi = std::min(a, t + a);
    double v = 0.0;
    if (hi > lo) {
      GaussRule inner = gauss_rule(lo, hi, 12, 16);
      for (std::size_t j = 0; j < inner.nodes.size(); ++j) {
        double y = inner.nodes[j];
        v += inner.weights[j] * (fn.scale_ * std_bump(y / a)) *
             (fn.scale_ * std_bump((t - y) / a));
      }
    }
    fn.f_vals_[i] = v;
  }

  // Cross-check the two construction formulas on a probe set.
  const double probes[] = {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 35.0, 50.0};
  double worst = 0.0;
  for (double x : probes) worst = std::max(worst, std::abs(fn.sin_form(x) - fn.ghat_form(x)));
  fn.formula_disagreement_ = worst;
  if (worst > 1e-4)
    throw construction_error("build_normalizing: construction formulas disagree by " +
                             std::to_string(worst));

  // Table over [-R, R], R = 200 b / epsilon; asymptote +-1 beyond.
  const double R = 200.0 * fn.bandwidth_ / epsilon;
  const int n = 4001;
  fn.table_x_.resize(n);
  fn.table_chi_.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -R + 2.0 * R * i / (n - 1);
    fn.table_x_[i] = x;
    fn.table_chi_[i] = fn.chi_unscaled(epsilon * x / fn.bandwidth_);
  }
  return fn;
}

double NormalizingFn::operator()(double x) const {
  switch (tag_) {
    case Tag::x_over_sqrt: return x / std::sqrt(1.0 + x * x);
    case Tag::arctan: return (2.0 / M_PI) * std::atan(x);
    case Tag::gg_bump: return chi_unscaled(epsilon_ * x / bandwidth_);
  }
  return 0.0;
}

double NormalizingFn::table_eval(double x) const {
  if (tag_ != Tag::gg_bump) return (*this)(x);
  const double R = table_x_.back();
  if (x >= R) return 1.0;
  if (x <= -R) return -1.0;
  const double h = table_x_[1] - table_x_[0];
  int i = static_cast<int>(std::floor((x - table_x_[0]) / h));
  i = std::clamp(i, 1, static_cast<int>(table_x_.size()) - 3);
  // cubic Lagrange on 4 neighboring nodes (local coordinates s in [0,1])
  double s = (x - table_x_[i]) / h;
  double ym1 = table_chi_[i - 1], y0 = table_chi_[i], y1 = table_chi_[i + 1],
         y2 = table_chi_[i + 2];
  return ym1 * (-s * (s - 1) * (s - 2)) / 6.0 + y0 * ((s + 1) * (s - 1) * (s - 2)) / 2.0 +
         y1 * (-(s + 1) * s * (s - 2)) / 2.0 + y2 * ((s + 1) * s * (s - 1)) / 6.0;
}

double NormalizingFn::fourier_support_radius() const {
  if (tag_ != Tag::gg_bump) return std::numeric_limits<double>::infinity();
  // supp(chi_hat) of the unscaled chi lies in supp(f)/(2 pi) = [-a/pi, a/pi];
  // the rescale x -> eps x / b shrinks it by eps/b.
  return epsilon_ * bump_radius_ / (M_PI * bandwidth_);
}

cxd NormalizingFn::pair_fourier(const std::function<cxd(double)>& w) const {
  if (tag_ != Tag::gg_bump)
    throw precondition_error("pair_fourier: normalizing function is not band-limited");
  const cxd w0 = w(0.0);
  cxd acc(0, 0);
  for (std::size_t i = 0; i < f_rule_.nodes.size(); ++i) {
    double t = f_rule_.nodes[i];
    acc += f_rule_.weights[i] * f_vals_[i] * (w(epsilon_ * t / (kTwoPi * bandwidth_)) - w0) / t;
  }
  return -kI * acc;
}

ScalarFn NormalizingFn::as_scalar_fn() const {
  NormalizingFn copy = *this;
  return [copy](double x) { return cxd(copy(x), 0.0); };
}

Mollifier make_mollifier(double a, double t, int N) {
  if (a <= 0 || t <= 0) throw input_error("make_mollifier: scales must be positive");
  if (a * t >= M_PI) throw input_error("make_mollifier: kernel does not fit the period");
  Mollifier mol;
  mol.a = a;
  mol.t = t;
  mol.N = N;
  mol.kernel = RVec::Zero(N);
  for (int j = 0; j < N; ++j) {
    double d = kTwoPi * j / N;
    if (d > M_PI) d -= kTwoPi;
    mol.kernel[j] = std_bump(d / (a * t)) / (a * t);
  }
  double total = mol.kernel.sum() * (kTwoPi / N);
  if (total <= 0) throw numeric_error("make_mollifier: empty kernel");
  mol.kernel /= total;
  Vec kc = mol.kernel.cast<cxd>();
  mol.multiplier = dft_coefficients(kc) * kTwoPi;  // (2pi/N) sum k e^{-im theta}
  return mol;
}

Section mollify(const Mollifier& mol, const Section& u) {
  if (u.N() != mol.N) throw input_error("mollify: grid mismatch");
  Mat out(u.k(), u.N());
  for (int r = 0; r < u.k(); ++r) {
    Vec c = dft_coefficients(u.samples.row(r).transpose());
    c = c.cwiseProduct(mol.multiplier);
    out.row(r) = dft_synthesis(c).transpose();
  }
  return Section(std::move(out));
}

MollifierSuiteReport mollifier_suite(double a, const std::vector<double>& t_ladder, int N,
                                     int n_random, int band, Rng& rng) {
  MollifierSuiteReport rep;
  std::vector<Mollifier> mols;
  for (double t : t_ladder) mols.push_back(make_mollifier(a, t, N));
  rep.operator_norms.resize(mols.size());
  for (std::size_t i = 0; i < mols.size(); ++i)
    rep.operator_norms[i] = mols[i].multiplier.cwiseAbs().maxCoeff();

  rep.max_norm_ratio = 0.0;
  for (int p = 0; p < n_random; ++p) {
    Section u = random_band_limited(1, N, N / 4, rng);
    double nu = std::sqrt(u.samples.squaredNorm());
    for (const auto& mol : mols) {
      Section fu = mollify(mol, u);
      rep.max_norm_ratio = std::max(rep.max_norm_ratio,
                                    std::sqrt(fu.samples.squaredNorm()) / nu);
    }
  }
  rep.norms_bounded = rep.max_norm_ratio <= 1.0 + 1e-8;

  rep.strictly_decreasing = true;
  for (int p = 0; p < 10; ++p) {
    Section u = random_band_limited(1, N, band, rng);
    std::vector<double> devs;
    for (const auto& mol : mols) {
      Section fu = mollify(mol, u);
      devs.push_back(std::sqrt((fu.samples - u.samples).squaredNorm() * kTwoPi / N));
    }
    for (std::size_t i = 1; i < devs.size(); ++i)
      if (!(devs[i] < devs[i - 1])) rep.strictly_decreasing = false;
    rep.convergence.push_back(std::move(devs));
  }
  return rep;
}

namespace {

// ||A|| by power iteration on A^dagger A with FFT-based applications.
double commutator_norm_grid(const Mollifier& mol, const RVec& f_scalar) {
  const int N = mol.N;
  Vec fc = f_scalar.cast<cxd>();
  auto deriv = [N](const Vec& v) { return spectral_derivative(v); };
  auto conv = [&mol](const Vec& v) {
    Vec c = dft_coefficients(v);
    c = c.cwiseProduct(mol.multiplier);
    return dft_synthesis(c);
  };
  auto conv_adj = [&mol](const Vec& v) {
    Vec c = dft_coefficients(v);
    c = c.cwiseProduct(mol.multiplier.conjugate());
    return dft_synthesis(c);
  };
  auto A = [&](const Vec& x) -> Vec {
    return fc.cwiseProduct(deriv(conv(x))) - conv(fc.cwiseProduct(deriv(x)));
  };
  auto Aadj = [&](const Vec& y) -> Vec {
    // (M_f D K)^* = -K D M_f,  (K M_f D)^* = -D M_f K^*  (D skew, f real)
    return -conv_adj(deriv(fc.conjugate().cwiseProduct(y))) +
           deriv(fc.conjugate().cwiseProduct(conv_adj(y)));
  };
  Rng local(0x9e3779b97f4a7c15ull);
  double best = 0.0;
  for (int restart = 0; restart < 3; ++restart) {
    Vec x = local.cnormal_vec(N);
    x /= x.norm();
    for (int it = 0; it < 300; ++it) {
      Vec y = Aadj(A(x));
      double n = y.norm();
      if (n == 0) break;
      x = y / n;
    }
    best = std::max(best, A(x).norm());
  }
  return best;
}

}  // namespace

CommutatorBoundReport mollifier_commutator_bound(double a, const std::vector<double>& t_ladder,
                                                 const RVec& f_scalar, int N,
                                                 double derivative_bound) {
  CommutatorBoundReport rep;
  rep.t_ladder = t_ladder;

  if (derivative_bound < 0) {
    Vec df = spectral_derivative(f_scalar.cast<cxd>());
    derivative_bound = df.cwiseAbs().maxCoeff();
  }
  rep.derivative_bound = derivative_bound;

  // Continuum profile norms of the normalized bump phi (L1 norm 1 by scaling).
  GaussRule r = gauss_rule(-a, a, 32, 16);
  double l1 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    l1 += r.weights[i] * std_bump(r.nodes[i] / a);
  double l1d = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double x = r.nodes[i] / a;
    double w = std_bump(x);
    double dphi = w == 0 ? 0.0 : w * (-2.0 * x / ((1.0 - x * x) * (1.0 - x * x))) / a;
    l1d += r.weights[i] * std::abs(dphi) / l1;
  }
  rep.schur_bound = derivative_bound * (a * l1d + 1.0);

  for (double t : t_ladder) {
    Mollifier mol = make_mollifier(a, t, N);
    rep.numeric_norms.push_back(commutator_norm_grid(mol, f_scalar));
  }
  double mx = *std::max_element(rep.numeric_norms.begin(), rep.numeric_norms.end());
  double mn = *std::min_element(rep.numeric_norms.begin(), rep.numeric_norms.end());
  rep.variation = mn > 1e-12 ? (mx - mn) / mn : 0.0;
  // 1e-9 slack absorbs grid round-off when both sides are essentially zero
  rep.verdict = mx <= rep.schur_bound + 1e-9;
  return rep;
}

BandLimitedFn fejer_pair(double w) {
  BandLimitedFn fn;
  fn.psi = [w](double x) {
    double z = M_PI * w * x;
    double s = sinc(z);
    return cxd(w * s * s, 0.0);
  };
  fn.psi_hat = [w](double s) {
    double v = 1.0 - std::abs(s) / w;
    return cxd(v > 0 ? v : 0.0, 0.0);
  };
  fn.hat_radius = w;
  return fn;
}

namespace {

// s -> <e^{2 pi i s Hhat} u, v> through the eigenframe; inner product linear
// in the first slot.
std::function<cxd(double)> group_coefficient(const DiscreteOperator& op, const Vec& u_white,
                                             const Vec& v_white) {
  const auto& dec = op.eig();
  Vec ut = dec.V.adjoint() * u_white;
  Vec vt = dec.V.adjoint() * v_white;
  RVec lambda = dec.lambda;
  Vec prod = ut.cwiseProduct(vt.conjugate());
  return [lambda, prod](double s) {
    cxd acc(0, 0);
    for (Eigen::Index j = 0; j < lambda.size(); ++j)
      acc += prod[j] * std::exp(kI * kTwoPi * s * lambda[j]);
    return acc;
  };
}

}  // namespace

Lemma1035Report lemma_10_3_5_check(const DiscreteOperator& op, const NormalizingFn& chi,
                                   const Vec& u_white, const Vec& v_white) {
  Mat F = func_calc(op, chi.as_scalar_fn());
  cxd lhs = (v_white.adjoint() * (F * u_white))(0, 0);
  cxd rhs = chi.pair_fourier(group_coefficient(op, u_white, v_white));
  return Lemma1035Report{lhs, rhs, std::abs(lhs - rhs)};
}

Lemma1035Report lemma_10_3_5_check(const DiscreteOperator& op, const BandLimitedFn& psi,
                                   const Vec& u_white, const Vec& v_white, int panels) {
  Mat F = func_calc(op, psi.psi);
  cxd lhs = (v_white.adjoint() * (F * u_white))(0, 0);
  auto g = group_coefficient(op, u_white, v_white);
  double lammax = std::max(std::abs(op.eig().lambda[0]),
                           std::abs(op.eig().lambda[op.eig().lambda.size() - 1]));
  int p = std::max(panels, static_cast<int>(std::ceil(psi.hat_radius * lammax * 8)) + 8);
  GaussRule rule = gauss_rule(-psi.hat_radius, psi.hat_radius, p, 16);
  cxd rhs(0, 0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    rhs += rule.weights[i] * psi.psi_hat(rule.nodes[i]) * g(rule.nodes[i]);
  return Lemma1035Report{lhs, rhs, std::abs(lhs - rhs)};
}

}  // namespace khom
