#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace khom {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr cxd kI{0.0, 1.0};

/// Malformed or out-of-contract input (dimension mismatch, bad cutoff, ...).
struct input_error : std::runtime_error {
  explicit input_error(const std::string& m) : std::runtime_error(m) {}
};

/// A stated precondition of an operation does not hold for the given data.
struct precondition_error : std::runtime_error {
  explicit precondition_error(const std::string& m) : std::runtime_error(m) {}
};

/// Numerical failure (non-PD Gram, singular solve, quadrature breakdown).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& m) : std::runtime_error(m) {}
};

/// Failure while constructing a derived object (e.g. normalizing function).
struct construction_error : std::runtime_error {
  explicit construction_error(const std::string& m) : std::runtime_error(m) {}
};

/// Deterministic random source; all randomized checks draw through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }
  cxd cnormal() { return cxd(normal_(gen_), normal_(gen_)); }
  std::uint64_t raw() { return gen_(); }

  Vec cnormal_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cnormal();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Largest singular value (operator 2-norm).
double op_norm(const Mat& a);

/// All singular values, sorted descending.
std::vector<double> singular_values(const Mat& a);

}  // namespace khom
