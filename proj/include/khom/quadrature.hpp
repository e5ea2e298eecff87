#pragma once

#include <functional>
#include <vector>

namespace khom {

/// Composite Gauss-Legendre rule: `panels` equal panels on [lo, hi],
/// `deg` nodes per panel. Panels are laid out symmetrically when the
/// interval is symmetric about 0, so odd integrands cancel to roundoff.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  double integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

GaussRule gauss_rule(double lo, double hi, int panels, int deg = 16);

/// sin(x)/x, series-stable near 0.
inline double sinc(double x) {
  if (std::abs(x) < 1e-6) {
    double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

}  // namespace khom
