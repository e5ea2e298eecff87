#include "khom/fourier.hpp"
#include "khom/quadrature.hpp"

#include <cmath>

namespace khom {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, sign = -1 forward.
void fft_inplace(std::vector<cxd>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * kTwoPi / static_cast<double>(len);
    const cxd wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cxd w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cxd u = a[i + j];
        cxd v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

Vec dft_naive(const Vec& x, int sign) {
  const Eigen::Index n = x.size();
  Vec out = Vec::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cxd acc(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      double ang = sign * kTwoPi * static_cast<double>(k) * static_cast<double>(j) /
                   static_cast<double>(n);
      acc += x[j] * cxd(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

Vec transform(const Vec& x, int sign) {
  const std::size_t n = static_cast<std::size_t>(x.size());
  if (!is_pow2(n)) return dft_naive(x, sign);
  std::vector<cxd> a(x.data(), x.data() + n);
  fft_inplace(a, sign);
  return Eigen::Map<Vec>(a.data(), static_cast<Eigen::Index>(n));
}

}  // namespace

Vec dft_coefficients(const Vec& samples) {
  return transform(samples, -1) / static_cast<double>(samples.size());
}

Vec dft_synthesis(const Vec& coeffs) { return transform(coeffs, +1); }

Vec spectral_derivative(const Vec& samples) {
  const Eigen::Index n = samples.size();
  Vec c = dft_coefficients(samples);
  for (Eigen::Index i = 0; i < n; ++i) {
    int m = mode_of_index(i, n);
    if (2 * m == -static_cast<int>(n)) {
      c[i] = 0.0;  // Nyquist mode has no odd derivative representative
    } else {
      c[i] *= kI * static_cast<double>(m);
    }
  }
  return dft_synthesis(c);
}

double op_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  if (a.rows() <= 48 && a.cols() <= 48) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

std::vector<double> singular_values(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return {};
  Eigen::BDCSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

GaussRule gauss_rule(double lo, double hi, int panels, int deg) {
  // Legendre nodes by Newton iteration on P_deg.
  static thread_local std::vector<std::pair<std::vector<double>, std::vector<double>>> cache(64);
  std::vector<double> xs, ws;
  if (deg < 64 && !cache[deg].first.empty()) {
    xs = cache[deg].first;
    ws = cache[deg].second;
  } else {
    xs.resize(deg);
    ws.resize(deg);
    for (int i = 0; i < deg; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (deg + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= deg; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = deg * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= deg; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = deg * (x * p1 - p0) / (x * x - 1.0);
      xs[i] = x;
      ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (deg < 64) cache[deg] = {xs, ws};
  }
  GaussRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * deg);
  rule.weights.reserve(static_cast<std::size_t>(panels) * deg);
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int i = 0; i < deg; ++i) {
      rule.nodes.push_back(mid + 0.5 * h * xs[i]);
      rule.weights.push_back(0.5 * h * ws[i]);
    }
  }
  return rule;
}

}  // namespace khom
