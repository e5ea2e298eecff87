#include "khom/khomology.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace khom {

DecayPolicy slow_decay_policy() { return DecayPolicy{0.05, 50, 0.1}; }

double DecayReport::statistic(const std::vector<double>& sorted_desc, int j, int stride) {
  if (sorted_desc.empty()) return 0.0;
  std::size_t idx = static_cast<std::size_t>(stride) * (j - 1);
  if (idx >= sorted_desc.size()) idx = sorted_desc.size() - 1;
  return sorted_desc[idx];
}

DecayReport make_decay_report(std::map<int, std::vector<double>> values,
                              const DecayPolicy& policy, int stride) {
  DecayReport rep;
  rep.singular_values = std::move(values);
  rep.policy = policy;
  rep.stride = std::max(1, stride);
  if (rep.singular_values.empty()) {
    rep.verdict = false;
    return rep;
  }
  const auto& top = rep.singular_values.rbegin()->second;
  double head = top.empty() ? 0.0 : top.front();
  if (head < 1e-12) {
    // Zero at working precision: compact outright (degenerate direction).
    rep.verdict = true;
    rep.tail_ratio = 0.0;
    rep.worst_drift = 0.0;
    return rep;
  }
  rep.tail_ratio = DecayReport::statistic(top, policy.j_star, rep.stride) / head;

  rep.worst_drift = 0.0;
  if (rep.singular_values.size() >= 2) {
    auto it = rep.singular_values.rbegin();
    const auto& prev = std::next(it)->second;
    // The lower half of the smaller level's sorted profile is shaped by its
    // own truncation edge (the same interior-window phenomenon as kernel
    // counting); stabilization is only meaningful on the interior indices.
    int prev_levels = static_cast<int>(prev.size() / rep.stride) + 1;
    int j_cap = std::min(policy.j_star, prev_levels / 2);
    for (int j = 1; j <= j_cap; ++j) {
      if (static_cast<std::size_t>(rep.stride) * (j - 1) >= top.size()) break;
      double a = DecayReport::statistic(top, j, rep.stride);
      double b = DecayReport::statistic(prev, j, rep.stride);
      double denom = std::max(std::abs(a), 1e-12 * head);
      rep.worst_drift = std::max(rep.worst_drift, std::abs(a - b) / denom);
    }
  }
  rep.verdict = rep.tail_ratio < policy.tau && rep.worst_drift < policy.drift;
  return rep;
}

std::map<std::string, Vec> default_multipliers(int N) {
  std::map<std::string, Vec> out;
  Vec one = Vec::Ones(N), ep(N), em(N), sn(N), cs(N);
  for (int j = 0; j < N; ++j) {
    double th = kTwoPi * j / N;
    ep[j] = std::exp(kI * th);
    em[j] = std::exp(-kI * th);
    sn[j] = std::sin(th);
    cs[j] = std::cos(th);
  }
  out["one"] = one;
  out["e_itheta"] = ep;
  out["e_minus_itheta"] = em;
  out["sin_theta"] = sn;
  out["cos_theta"] = cs;
  return out;
}

namespace {

Mat grading_matrix(const DiffOp& d, const CircleBundleSpec& spec, const DiscreteOperator& op) {
  std::vector<Mat> X(spec.N, *d.grading);
  return matrix_multiplier(X, spec, op);
}

double spec_norm_in_fiber_metric(const Mat& a, const Mat& R) {
  // operator norm of a on (C^k, H) with H = R^dagger R
  Mat conj = R * a * R.inverse();
  return op_norm(conj);
}

}  // namespace

FredholmModuleData build_module(const DiffOp& d, const CircleBundleSpec& spec,
                                const NormalizingFn& chi, const std::vector<int>& ladder,
                                Rng& rng, bool parallel, std::map<std::string, Vec> multipliers) {
  if (ladder.empty()) throw input_error("build_module: empty ladder");
  SymmetryReport sym = check_symmetric(d, spec, 8, 1e-8, rng);
  if (!sym.symmetric)
    throw precondition_error("build_module: symmetry gate failed (residual " +
                             std::to_string(sym.max_residual) + ")");
  EllipticityReport ell = is_elliptic(d);
  if (!ell.elliptic)
    throw precondition_error("build_module: ellipticity gate failed (min |det symbol| " +
                             std::to_string(ell.min_abs_det) + ")");

  FredholmModuleData mod;
  mod.spec = spec;
  mod.ladder = ladder;
  mod.chi = chi;
  if (multipliers.empty()) multipliers = default_multipliers(spec.N);

  double speed = 0.0;
  for (int l = 0; l < spec.N; ++l)
    speed = std::max(speed, spec_norm_in_fiber_metric(d.A[l], spec.trivialization(l)));
  mod.propagation_speed = speed;

  std::vector<DiscreteOperator> ops = refine_ladder(d, spec, ladder, parallel);
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    int M = ladder[i];
    mod.ops.emplace(M, std::move(ops[i]));
    const DiscreteOperator& op = mod.ops.at(M);
    mod.F[M] = func_calc(op, chi.as_scalar_fn());
    for (const auto& [name, samples] : multipliers)
      mod.multipliers[name][M] = multiplier_matrix(samples, spec, op);
    if (d.grading) mod.grading[M] = grading_matrix(d, spec, op);
  }
  return mod;
}

ModuleVerification verify_module(const FredholmModuleData& mod, const DecayPolicy& policy) {
  if (mod.ladder.size() < 4) throw input_error("verify_module: ladder too short (need >= 4)");
  ModuleVerification v;
  const Mat& Ftop = mod.F.at(mod.top_cutoff());
  v.selfadjoint_residual = op_norm(Ftop - Ftop.adjoint());

  // one sorted value per spectral level: levels carry multiplicity
  // 2 * rank from the +-m pairing and the fiber dimension
  const int top = mod.top_cutoff();
  const int stride =
      2 * std::max<int>(1, static_cast<int>(mod.F.at(top).rows()) / (2 * top + 1));

  std::map<int, std::vector<double>> f2vals;
  for (int M : mod.ladder) {
    const Mat& F = mod.F.at(M);
    Mat s = F * F - Mat::Identity(F.rows(), F.cols());
    f2vals[M] = singular_values(s);
  }
  v.f2_minus_1 = make_decay_report(std::move(f2vals), policy, stride);

  bool all = v.f2_minus_1.verdict;
  for (const auto& [name, per_cut] : mod.multipliers) {
    std::map<int, std::vector<double>> vals;
    for (int M : mod.ladder) {
      const Mat& F = mod.F.at(M);
      const Mat& Mu = per_cut.at(M);
      vals[M] = singular_values(F * Mu - Mu * F);
    }
    v.commutators[name] = make_decay_report(std::move(vals), policy, stride);
    all = all && v.commutators[name].verdict;
  }
  v.verdict = all && v.selfadjoint_residual < 1e-10;
  return v;
}

DisjointSupportResult disjoint_support_product(const FredholmModuleData& mod, const Vec& f1,
                                               const Vec& f2, double gap,
                                               double window_fraction) {
  if (!mod.chi.band_limited())
    throw precondition_error("disjoint_support_product: module chi is not band-limited");
  double required = gap / (kTwoPi * mod.propagation_speed);
  if (mod.chi.epsilon() >= required)
    throw precondition_error("disjoint_support_product: need epsilon < " +
                             std::to_string(required) + ", module has " +
                             std::to_string(mod.chi.epsilon()));
  const int M = mod.top_cutoff();
  const DiscreteOperator& op = mod.ops.at(M);
  Mat M1 = multiplier_matrix(f1, mod.spec, op);
  Mat M2 = multiplier_matrix(f2, mod.spec, op);
  Mat P = M1 * mod.F.at(M) * M2;

  const int mwin = static_cast<int>(std::floor(M * (1.0 - 2.0 * window_fraction)));
  std::vector<int> keep;
  for (int idx = 0; idx < op.basis.dim(); ++idx)
    if (std::abs(op.basis.mode_of(idx)) <= mwin) keep.push_back(idx);
  Mat Pw(keep.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c) Pw(r, c) = P(keep[r], keep[c]);

  return DisjointSupportResult{op_norm(Pw), op_norm(P), required, window_fraction};
}

PerturbationPathResult compact_perturbation_path(const FredholmModuleData& mod,
                                                 const FredholmModuleData& other, int steps,
                                                 const DecayPolicy& policy) {
  if (mod.ladder != other.ladder)
    throw input_error("compact_perturbation_path: modules live on different ladders");
  if (steps < 1) throw input_error("compact_perturbation_path: need at least one step");
  const Mat& Fp = other.F.at(other.top_cutoff());
  if (op_norm(Fp - Fp.adjoint()) > 1e-8)
    throw precondition_error("compact_perturbation_path: endpoint not self-adjoint");

  PerturbationPathResult res;
  const int topc = mod.top_cutoff();
  const int stride =
      2 * std::max<int>(1, static_cast<int>(mod.F.at(topc).rows()) / (2 * topc + 1));
  std::map<int, std::vector<double>> dvals;
  for (int M : mod.ladder) dvals[M] = singular_values(mod.F.at(M) - other.F.at(M));
  res.difference = make_decay_report(std::move(dvals), policy, stride);
  if (!res.difference.verdict)
    throw precondition_error(
        "compact_perturbation_path: endpoint is not a compact perturbation under the policy");

  for (int si = 0; si <= steps; ++si) {
    double t = static_cast<double>(si) / steps;
    FredholmModuleData interp = mod;
    for (int M : mod.ladder) interp.F[M] = (1.0 - t) * mod.F.at(M) + t * other.F.at(M);
    ModuleVerification v = verify_module(interp, policy);
    res.step_verdicts.push_back(v.verdict);
  }
  res.verdict = std::all_of(res.step_verdicts.begin(), res.step_verdicts.end(),
                            [](bool b) { return b; });
  return res;
}

namespace {

struct IndexFrame {
  RVec lambda;  // eigenvalues of Hhat (window coordinate)
  RVec mu;      // eigenvalues of F in the same frame
  Mat mu_tilde; // multiplier compressed to the frame
};

IndexFrame index_frame(const FredholmModuleData& mod, int cutoff, const Vec& u) {
  if (!mod.sum_parts.empty()) {
    IndexFrame a = index_frame(*mod.sum_parts[0], cutoff, u);
    IndexFrame b = index_frame(*mod.sum_parts[1], cutoff, u);
    IndexFrame out;
    const Eigen::Index na = a.lambda.size(), nb = b.lambda.size();
    out.lambda.resize(na + nb);
    out.lambda << a.lambda, b.lambda;
    out.mu.resize(na + nb);
    out.mu << a.mu, b.mu;
    out.mu_tilde = Mat::Zero(na + nb, na + nb);
    out.mu_tilde.topLeftCorner(na, na) = a.mu_tilde;
    out.mu_tilde.bottomRightCorner(nb, nb) = b.mu_tilde;
    return out;
  }
  const DiscreteOperator& op = mod.ops.at(cutoff);
  const auto& dec = op.eig();
  IndexFrame out;
  out.lambda = dec.lambda;
  Mat Ft = dec.V.adjoint() * mod.F.at(cutoff) * dec.V;
  out.mu = Ft.diagonal().real();
  Mat Mu = multiplier_matrix(u, mod.spec, op);
  out.mu_tilde = dec.V.adjoint() * Mu * dec.V;
  return out;
}

struct LevelIndex {
  int ker, coker, ties;
  double gap;
};

LevelIndex index_at_level(const IndexFrame& fr, const IndexOptions& opts) {
  const Eigen::Index d = fr.lambda.size();
  std::vector<int> pidx;
  int ties = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(fr.mu[i]) <= opts.tie_tol) {
      ++ties;
      pidx.push_back(static_cast<int>(i));  // tie rule: zero modes go to P
    } else {
      gap = std::min(gap, std::abs(fr.mu[i]));
      if (fr.mu[i] > 0) pidx.push_back(static_cast<int>(i));
    }
  }
  const Eigen::Index r = static_cast<Eigen::Index>(pidx.size());
  Mat B(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) B(i, j) = fr.mu_tilde(pidx[i], pidx[j]);

  double lambda_max = fr.lambda.cwiseAbs().maxCoeff();
  double lambda_win = lambda_max * (1.0 - 2.0 * opts.window_fraction);

  Eigen::BDCSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int ker = 0, coker = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > opts.kernel_tol * std::max(smax, 1.0)) continue;
    auto interior_mass = [&](const Vec& w) {
      double inside = 0.0, total = 0.0;
      for (Eigen::Index j = 0; j < r; ++j) {
        double m2 = std::norm(w[j]);
        total += m2;
        if (std::abs(fr.lambda[pidx[j]]) <= lambda_win) inside += m2;
      }
      return total > 0 ? inside / total : 0.0;
    };
    if (interior_mass(svd.matrixV().col(i)) > 0.5) ++ker;
    if (interior_mass(svd.matrixU().col(i)) > 0.5) ++coker;
  }
  return LevelIndex{ker, coker, ties, gap};
}

}  // namespace

IndexResult index_pairing(const FredholmModuleData& mod, const Vec& u, const IndexOptions& opts) {
  if (u.size() != mod.spec.N) throw input_error("index_pairing: sample count mismatch");
  for (Eigen::Index j = 0; j < u.size(); ++j)
    if (std::abs(std::abs(u[j]) - 1.0) > 1e-8)
      throw precondition_error("index_pairing: multiplier is not unitary-valued at sample " +
                               std::to_string(j));
  IndexResult res;
  for (int M : mod.ladder) {
    IndexFrame fr = index_frame(mod, M, u);
    LevelIndex li = index_at_level(fr, opts);
    res.ladder_cutoffs.push_back(M);
    res.ladder_indices.push_back(li.ker - li.coker);
    if (M == mod.top_cutoff()) {
      res.ker = li.ker;
      res.coker = li.coker;
      res.index = li.ker - li.coker;
      res.spectral_gap = li.gap;
      res.tie_count = li.ties;
    }
  }
  const std::size_t n = res.ladder_indices.size();
  if (n >= 2 && res.ladder_indices[n - 1] != res.ladder_indices[n - 2]) {
    std::string diag = "index_pairing: no stabilization across top cutoffs (ladder:";
    for (std::size_t i = 0; i < n; ++i)
      diag += " " + std::to_string(res.ladder_cutoffs[i]) + "->" +
              std::to_string(res.ladder_indices[i]);
    throw numeric_error(diag + ")");
  }
  return res;
}

int winding_number(const Vec& u) {
  const Eigen::Index n = u.size();
  if (n < 2) throw input_error("winding_number: need at least two samples");
  double mx = u.cwiseAbs().maxCoeff();
  double mn = u.cwiseAbs().minCoeff();
  if (mn < 1e-8 * mx) throw input_error("winding_number: loop nearly vanishes at a sample");
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cxd ratio = u[(j + 1) % n] / u[j];
    total += std::arg(ratio);
  }
  double w = total / kTwoPi;
  double rounded = std::round(w);
  if (std::abs(w - rounded) > 0.25)
    throw numeric_error("winding_number: phase increments do not close to an integer");
  return static_cast<int>(rounded);
}

CliffordRep clifford(int n) {
  if (n < 1 || n > 8) throw input_error("clifford: n must be between 1 and 8");
  const int dim = 1 << n;
  CliffordRep rep;
  rep.n = n;
  rep.generators.assign(n, Mat::Zero(dim, dim));
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < dim; ++s) {
      int lower = s & ((1 << i) - 1);
      int sign = (__builtin_popcount(lower) % 2 == 0) ? 1 : -1;
      if (s & (1 << i)) {
        rep.generators[i](s & ~(1 << i), s) = -sign;  // eps_i eps_i = -1
      } else {
        rep.generators[i](s | (1 << i), s) = sign;
      }
    }
  }
  rep.grading = Mat::Zero(dim, dim);
  for (int s = 0; s < dim; ++s)
    rep.grading(s, s) = (__builtin_popcount(s) % 2 == 0) ? 1.0 : -1.0;
  return rep;
}

FredholmModuleData sum_modules(const FredholmModuleData& x, const FredholmModuleData& y) {
  if (x.ladder != y.ladder) throw input_error("sum_modules: ladders differ");
  if (x.graded() != y.graded()) throw input_error("sum_modules: grading mismatch");
  for (const auto& [name, _] : x.multipliers)
    if (!y.multipliers.count(name)) throw input_error("sum_modules: multiplier sets differ");
  for (const auto& [name, _] : y.multipliers)
    if (!x.multipliers.count(name)) throw input_error("sum_modules: multiplier sets differ");

  FredholmModuleData s;
  s.spec = x.spec;
  s.ladder = x.ladder;
  s.chi = x.chi;
  s.propagation_speed = std::max(x.propagation_speed, y.propagation_speed);
  auto blockdiag = [](const Mat& a, const Mat& b) {
    Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
  };
  for (int M : s.ladder) {
    s.F[M] = blockdiag(x.F.at(M), y.F.at(M));
    if (x.graded()) s.grading[M] = blockdiag(x.grading.at(M), y.grading.at(M));
  }
  for (const auto& [name, per_cut] : x.multipliers)
    for (int M : s.ladder)
      s.multipliers[name][M] = blockdiag(per_cut.at(M), y.multipliers.at(name).at(M));
  s.sum_parts = {std::make_shared<FredholmModuleData>(x),
                 std::make_shared<FredholmModuleData>(y)};
  return s;
}

FredholmModuleData opposite_module(const FredholmModuleData& x) {
  FredholmModuleData o = x;
  for (auto& [M, F] : o.F) F = -F;
  for (auto& [M, g] : o.grading) g = -g;
  return o;
}

DecayReport rellich_report(const CircleBundleSpec& spec, const std::vector<int>& ladder,
                           const DecayPolicy& policy) {
  std::map<int, std::vector<double>> vals;
  for (int M : ladder) {
    std::vector<double> v;
    for (int m = -M; m <= M; ++m)
      for (int j = 0; j < spec.k; ++j) v.push_back(1.0 / std::sqrt(1.0 + double(m) * m));
    std::sort(v.begin(), v.end(), std::greater<double>());
    vals[M] = std::move(v);
  }
  return make_decay_report(std::move(vals), policy, 2 * spec.k);
}

GardingEstimate garding_estimate(const DiffOp& d, const CircleBundleSpec& spec, int trials,
                                 int band, Rng& rng) {
  EllipticityReport ell = is_elliptic(d);
  if (!ell.elliptic)
    throw precondition_error("garding_estimate: operator is not elliptic (min |det| " +
                             std::to_string(ell.min_abs_det) + ")");
  double cmin = std::numeric_limits<double>::infinity();
  int worst = -1;
  for (int t = 0; t < trials; ++t) {
    Section u = random_band_limited(spec.k, spec.N, band, rng);
    double l2 = l2_norm(u, spec);
    double dl2 = l2_norm(apply(d, u), spec);
    double s1 = sobolev_norm_fourier(u);
    double ratio = (l2 + dl2) / s1;
    if (ratio < cmin) {
      cmin = ratio;
      worst = t;
    }
  }
  return GardingEstimate{cmin, worst};
}

PropagationReport propagation_check(const DiffOp& d, const CircleBundleSpec& spec,
                                    const Section& u, double k_center, double k_width,
                                    double w_margin, const std::vector<double>& s_ladder,
                                    int cutoff) {
  DiscreteOperator op = assemble(d, spec, cutoff);
  Vec c = project_section(u, spec, op);
  Vec w = op.to_white(c);
  const auto& dec = op.eig();

  // Cutoff function g: 1 on K, smooth ramp to 0 over the margin.
  Vec g(spec.N);
  for (int j = 0; j < spec.N; ++j) {
    double th = spec.theta(j) - k_center;
    th -= kTwoPi * std::round(th / kTwoPi);
    double a = std::abs(th);
    if (a <= k_width / 2)
      g[j] = 1.0;
    else if (a < k_width / 2 + w_margin)
      g[j] = smooth_ramp((k_width / 2 + w_margin - a) / w_margin);
    else
      g[j] = 0.0;
  }
  std::vector<Mat> comm = commutator_mult(d, g);
  double cnorm = 0.0;
  for (int l = 0; l < spec.N; ++l)
    cnorm = std::max(cnorm, spec_norm_in_fiber_metric(comm[l], spec.trivialization(l)));
  double cbound = cnorm * (1.0 + 1e-9);

  PropagationReport rep;
  rep.epsilon_predicted = cbound > 0 ? 1.0 / cbound : std::numeric_limits<double>::infinity();
  rep.s_values = s_ladder;

  double total_mass = std::abs(inner_product(u, u, spec).real());

  bool is_dirac = spec.k == 1;
  for (int l = 0; l < spec.N && is_dirac; ++l)
    is_dirac = (d.A[l] + kI * Mat::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-14 &&
               d.B[l].cwiseAbs().maxCoeff() < 1e-14;

  rep.rotation_oracle_residual = 0.0;
  for (double s : s_ladder) {
    Vec phases(dec.lambda.size());
    for (Eigen::Index i = 0; i < dec.lambda.size(); ++i)
      phases[i] = std::exp(kI * s * dec.lambda[i]);
    Vec ws = dec.V * phases.asDiagonal() * (dec.V.adjoint() * w);
    Section us = synthesize(op.from_white(ws), spec, op.basis);
    double outside = 0.0;
    for (int j = 0; j < spec.N; ++j) {
      double th = spec.theta(j) - k_center;
      th -= kTwoPi * std::round(th / kTwoPi);
      if (std::abs(th) > k_width / 2 + w_margin) {
        outside += spec.f[j] *
                   std::abs((us.samples.col(j).adjoint() * spec.H[j] * us.samples.col(j))(0, 0));
      }
    }
    outside *= kTwoPi / spec.N;
    rep.outside_mass.push_back(outside / total_mass);

    if (is_dirac) {
      // e^{isD} rotates: mode m picks up e^{ism}; compare against the matrix route.
      Vec cshift = c;
      for (int idx = 0; idx < op.basis.dim(); ++idx)
        cshift[idx] *= std::exp(kI * s * static_cast<double>(op.basis.mode_of(idx)));
      Section oracle = synthesize(cshift, spec, op.basis);
      double diff = (oracle.samples - us.samples).cwiseAbs().maxCoeff();
      rep.rotation_oracle_residual = std::max(rep.rotation_oracle_residual, diff);
    }
  }
  return rep;
}

}  // namespace khom
