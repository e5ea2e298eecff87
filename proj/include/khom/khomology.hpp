#pragma once

#include "khom/harmonic.hpp"

#include <map>
#include <memory>
#include <string>

namespace khom {

/// Finite-dimensional compactness criterion: fixed-index singular values must
/// stabilize across truncations, and the tail statistic must be a small
/// fraction of the head at the top cutoff. Spectral levels on the circle
/// carry multiplicity (the +-m pairing times the fiber rank), so the decay
/// statistic samples one sorted singular value per level:
/// s_j = sigma_{stride (j-1) + 1} (1-based), stride = 2 * rank.
struct DecayPolicy {
  double drift = 0.05;  // relative drift allowed for fixed-index values
  int j_star = 50;
  double tau = 1e-3;    // s_{j*} < tau * s_1 at the top cutoff
};

/// Default policy for 1/m-type spectral profiles (Sobolev embeddings,
/// differences of normalizing functions); tau swept once and frozen.
DecayPolicy slow_decay_policy();

struct DecayReport {
  std::map<int, std::vector<double>> singular_values;  // cutoff -> sorted desc
  DecayPolicy policy;
  int stride = 2;  // sorted values per spectral level
  bool verdict = false;
  double worst_drift = 0.0;
  double tail_ratio = 0.0;  // s_{j*}/s_1 at top cutoff

  static double statistic(const std::vector<double>& sorted_desc, int j, int stride = 2);
};

DecayReport make_decay_report(std::map<int, std::vector<double>> values,
                              const DecayPolicy& policy, int stride = 2);

/// Fredholm-module data over the truncation ladder: F = chi(Hhat) per cutoff
/// plus multiplier matrices in the same whitened frame.
struct FredholmModuleData {
  CircleBundleSpec spec;
  std::vector<int> ladder;
  std::map<int, DiscreteOperator> ops;
  std::map<int, Mat> F;
  std::map<std::string, std::map<int, Mat>> multipliers;
  std::map<int, Mat> grading;  // present iff the operator is graded
  NormalizingFn chi;
  double propagation_speed = 1.0;  // max over grid of ||A(theta)||
  // Nonempty for direct sums: the summands, whose frames are block-composed.
  std::vector<std::shared_ptr<const FredholmModuleData>> sum_parts;

  bool graded() const { return !grading.empty(); }
  int top_cutoff() const { return ladder.back(); }
};

/// Named default multiplier set {1, e^{i theta}, e^{-i theta}, sin, cos}.
std::map<std::string, Vec> default_multipliers(int N);

/// Gate (symmetry + ellipticity), assemble the ladder, apply functional
/// calculus. Throws precondition_error when a gate fails.
FredholmModuleData build_module(const DiffOp& d, const CircleBundleSpec& spec,
                                const NormalizingFn& chi, const std::vector<int>& ladder,
                                Rng& rng, bool parallel = false,
                                std::map<std::string, Vec> multipliers = {});

struct ModuleVerification {
  double selfadjoint_residual;
  DecayReport f2_minus_1;
  std::map<std::string, DecayReport> commutators;
  bool verdict;
};

ModuleVerification verify_module(const FredholmModuleData& mod, const DecayPolicy& policy);

struct DisjointSupportResult {
  double windowed_norm;  // ||M_f1 F M_f2|| restricted to the interior mode window
  double full_norm;      // unwindowed norm (reported; edge corners dominate it)
  double required_epsilon;
  double window_fraction;
};

/// || M_f1 F M_f2 || at the top cutoff for disjointly supported multipliers.
/// The norm is evaluated on the interior mode window (outermost fraction of
/// modes discarded per side) where the truncation corners cannot reach.
DisjointSupportResult disjoint_support_product(const FredholmModuleData& mod, const Vec& f1,
                                               const Vec& f2, double gap,
                                               double window_fraction = 0.25);

struct PerturbationPathResult {
  DecayReport difference;           // decay of F - F' at each cutoff
  std::vector<bool> step_verdicts;  // verify_module along the straight line
  bool verdict;
};

/// Straight-line operator homotopy from mod to other (same representation);
/// each interpolated module must verify.
PerturbationPathResult compact_perturbation_path(const FredholmModuleData& mod,
                                                 const FredholmModuleData& other, int steps,
                                                 const DecayPolicy& policy);

struct IndexResult {
  int index = 0;
  int ker = 0;
  int coker = 0;
  std::vector<int> ladder_indices;
  std::vector<int> ladder_cutoffs;
  double spectral_gap = 0.0;  // smallest |eigenvalue of F| above the tie tolerance
  int tie_count = 0;          // eigenvalues assigned to P by the tie rule
};

struct IndexOptions {
  double window_fraction = 0.25;  // interior window: outermost fraction dropped per side
  double tie_tol = 1e-8;          // eigenvalues of F within tie_tol of 0 go to P
  double kernel_tol = 1e-6;       // singular values below kernel_tol*max are kernel
};

/// Odd index pairing: P = spectral projection of F onto [0, inf),
/// T = P M_u P on range(P); kernel vectors are counted when their mass is
/// concentrated in the interior mode window. index = dim ker T - dim ker T*.
IndexResult index_pairing(const FredholmModuleData& mod, const Vec& u,
                          const IndexOptions& opts = {});

/// Total phase increment of the sampled loop, divided by 2 pi.
int winding_number(const Vec& u);

/// Left-multiplication representation of the Clifford algebra C_n on its
/// 2^n-dimensional Hilbert space, graded by word parity.
struct CliffordRep {
  int n;
  std::vector<Mat> generators;  // E_1..E_n
  Mat grading;
};

CliffordRep clifford(int n);

FredholmModuleData sum_modules(const FredholmModuleData& x, const FredholmModuleData& y);

/// Opposite module: reversed grading, negated operator.
FredholmModuleData opposite_module(const FredholmModuleData& x);

/// Sobolev embedding singular values (1+m^2)^{-1/2} over the ladder.
DecayReport rellich_report(const CircleBundleSpec& spec, const std::vector<int>& ladder,
                           const DecayPolicy& policy = slow_decay_policy());

struct GardingEstimate {
  double c_measured;  // min over trials of (||u||_2 + ||Du||_2)/||u||_1
  int worst_trial;
};

GardingEstimate garding_estimate(const DiffOp& d, const CircleBundleSpec& spec, int trials,
                                 int band, Rng& rng);

struct PropagationReport {
  std::vector<double> s_values;
  std::vector<double> outside_mass;  // relative mass outside W after transport
  double epsilon_predicted;          // 1/c with c > ||[D, M_g]||
  double rotation_oracle_residual;   // Dirac-only check; 0 when not applicable
};

/// Transport u by e^{i s Hhat} (no 2 pi factor) and measure mass outside W.
PropagationReport propagation_check(const DiffOp& d, const CircleBundleSpec& spec,
                                    const Section& u, double k_center, double k_width,
                                    double w_margin, const std::vector<double>& s_ladder,
                                    int cutoff);

}  // namespace khom
