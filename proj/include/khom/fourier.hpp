#pragma once

#include "khom/common.hpp"

namespace khom {

/// Discrete Fourier analysis of N samples: c_m = (1/N) sum_j u_j e^{-im theta_j},
/// stored in FFT index order (index i holds mode i for i < N/2, i - N otherwise).
Vec dft_coefficients(const Vec& samples);

/// Synthesis u_j = sum_m c_m e^{im theta_j} from FFT-ordered coefficients.
Vec dft_synthesis(const Vec& coeffs);

/// Mode number carried by FFT index i of an N-point transform.
inline int mode_of_index(Eigen::Index i, Eigen::Index n) {
  return static_cast<int>(i <= n / 2 - 1 || n == 1 ? i : i - n);
}

/// FFT index holding mode m (m in [-N/2, N/2)).
inline Eigen::Index index_of_mode(int m, Eigen::Index n) {
  return static_cast<Eigen::Index>(m >= 0 ? m : m + n);
}

/// Spectral derivative of periodic samples (Nyquist mode dropped).
Vec spectral_derivative(const Vec& samples);

}  // namespace khom
