#include "khom/funcalc.hpp"

#include "khom/harmonic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace khom {

Mat func_calc(const DiscreteOperator& op, const ScalarFn& h) {
  const auto& dec = op.eig();
  const Eigen::Index d = dec.lambda.size();
  Vec hl(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    cxd v = h(dec.lambda[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw numeric_error("func_calc: h non-finite at eigenvalue " +
                          std::to_string(dec.lambda[i]));
    hl[i] = v;
  }
  return dec.V * hl.asDiagonal() * dec.V.adjoint();
}

Mat cayley(const DiscreteOperator& op) {
  return func_calc(op, [](double t) { return cayley_scalar(t); });
}

InverseCayleyResult inverse_cayley(const Mat& u, double tol) {
  Eigen::ComplexEigenSolver<Mat> es(u);
  if (es.info() != Eigen::Success) throw numeric_error("inverse_cayley: eigensolver failed");
  double mind = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    mind = std::min(mind, std::abs(es.eigenvalues()[i] - cxd(1, 0)));
  if (mind < tol)
    throw input_error("inverse_cayley: unitary has an eigenvalue within " + std::to_string(tol) +
                      " of 1 (min distance " + std::to_string(mind) + ")");
  const Eigen::Index d = u.rows();
  Mat num = kI * (u + Mat::Identity(d, d));
  Mat den = u - Mat::Identity(d, d);
  // (U+1)(U-1)^-1 = (U-1)^-1 (U+1): both are rational functions of U.
  Mat res = den.fullPivLu().solve(num);
  return InverseCayleyResult{std::move(res), mind};
}

Mat unitary_group(const DiscreteOperator& op, double s, bool two_pi_convention) {
  const double phase = (two_pi_convention ? kTwoPi : 1.0) * s;
  return func_calc(op, [phase](double t) { return std::exp(kI * phase * t); });
}

ScalarFn parse_function_preset(const std::string& name,
                               const std::map<std::string, const NormalizingFn*>& chi_registry) {
  if (name == "id") return [](double x) { return cxd(x, 0); };
  if (name == "arctan") return [](double x) { return cxd(2.0 / M_PI * std::atan(x), 0); };
  if (name == "sqrt_rational")
    return [](double x) { return cxd(x / std::sqrt(1.0 + x * x), 0); };
  if (name == "exp") return [](double x) { return cxd(std::exp(x), 0); };
  if (name == "cayley") return [](double x) { return cayley_scalar(x); };
  if (name.rfind("sign_smooth:", 0) == 0) {
    double a = std::stod(name.substr(12));
    if (a <= 0) throw input_error("sign_smooth preset needs a positive scale");
    return [a](double x) { return cxd(x / std::sqrt(x * x + a * a), 0); };
  }
  if (name.rfind("chi:", 0) == 0) {
    auto it = chi_registry.find(name.substr(4));
    if (it == chi_registry.end())
      throw input_error("unknown normalizing function id in preset: " + name);
    return it->second->as_scalar_fn();
  }
  throw input_error("unknown function preset: " + name);
}

GradedCommutationReport graded_commutation_check(const DiscreteOperator& op, const Mat& T,
                                                 const ScalarFn& h, double hypothesis_tol) {
  GradedCommutationReport rep{};
  rep.hypothesis_residual = op_norm(T * op.white + op.white * T);
  if (rep.hypothesis_residual >= hypothesis_tol)
    throw precondition_error("graded_commutation_check: ||T Hhat + Hhat T|| = " +
                             std::to_string(rep.hypothesis_residual) +
                             " violates the anticommutation hypothesis");
  auto h_even = [&h](double x) { return 0.5 * (h(x) + h(-x)); };
  auto h_odd = [&h](double x) { return 0.5 * (h(x) - h(-x)); };
  Mat he = func_calc(op, h_even);
  Mat ho = func_calc(op, h_odd);
  rep.even_residual = op_norm(T * he - he * T);
  rep.odd_residual = op_norm(T * ho + ho * T);
  return rep;
}

}  // namespace khom
