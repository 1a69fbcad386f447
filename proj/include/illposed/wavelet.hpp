#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <stdexcept>

namespace illposed {

using Vector = Eigen::VectorXd;

/// Daubechies scaling filter with 8 vanishing moments (16 taps), Σh = √2.
/// Obtained by exact spectral factorization of the Daubechies polynomial;
/// shift-2 orthonormality and the moment conditions hold to machine precision.
inline constexpr std::array<double, 16> kDb8Filter = {
    -0.00011747678412476953, 0.00067544940645056933,  -0.00039174037337694705,
    -0.0048703529934515741,  0.0087460940474057766,   0.013981027917398282,
    -0.044088253930794755,   -0.017369301001807547,   0.12874742662047847,
    0.00047248457391328279,  -0.28401554296154691,    -0.015829105256349306,
    0.58535468365420673,     0.67563073629728976,     0.31287159091429995,
    0.054415842243104008,
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(int n) {
  int l = 0;
  while ((1 << l) < n) ++l;
  return l;
}

/// Deepest admissible decomposition: leaves a 4-coefficient approximation.
inline int max_dwt_levels(int n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("dwt: n must be a power of two");
  return std::max(0, log2_exact(n) - 2);
}

namespace detail {

// One analysis level with circular indexing; N must be even. Writes the
// approximation into out[0..N/2) and the detail into out[N/2..N).
inline void dwt_step(const double* x, int N, double* out) {
  constexpr int L = 16;
  const auto& h = kDb8Filter;
  const int half = N / 2;
  for (int k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (int m = 0; m < L; ++m) {
      const double v = x[(2 * k + m) % N];
      a += h[m] * v;
      d += ((m & 1) ? -h[L - 1 - m] : h[L - 1 - m]) * v;
    }
    out[k] = a;
    out[half + k] = d;
  }
}

// Transpose of dwt_step; exact inverse because the transform is orthonormal.
inline void idwt_step(const double* coeffs, int N, double* out) {
  constexpr int L = 16;
  const auto& h = kDb8Filter;
  const int half = N / 2;
  for (int i = 0; i < N; ++i) out[i] = 0.0;
  for (int k = 0; k < half; ++k) {
    const double a = coeffs[k];
    const double d = coeffs[half + k];
    for (int m = 0; m < L; ++m) {
      const double g = (m & 1) ? -h[L - 1 - m] : h[L - 1 - m];
      out[(2 * k + m) % N] += a * h[m] + d * g;
    }
  }
}

}  // namespace detail

/// Periodized orthonormal DWT. Output layout:
/// [approx (n/2^levels) | detail level `levels` | ... | detail level 1].
inline Vector dwt_forward(const Vector& v, int levels) {
  const int n = static_cast<int>(v.size());
  if (!is_power_of_two(n)) throw std::invalid_argument("dwt_forward: n must be a power of two");
  if (levels < 0 || levels > max_dwt_levels(n))
    throw std::invalid_argument("dwt_forward: levels must be in [0, log2(n) - 2]");
  Vector c = v;
  Vector tmp(n);
  int len = n;
  for (int l = 0; l < levels; ++l) {
    detail::dwt_step(c.data(), len, tmp.data());
    c.head(len) = tmp.head(len);
    len /= 2;
  }
  return c;
}

inline Vector dwt_inverse(const Vector& coeffs, int levels) {
  const int n = static_cast<int>(coeffs.size());
  if (!is_power_of_two(n)) throw std::invalid_argument("dwt_inverse: n must be a power of two");
  if (levels < 0 || levels > max_dwt_levels(n))
    throw std::invalid_argument("dwt_inverse: levels must be in [0, log2(n) - 2]");
  Vector c = coeffs;
  Vector tmp(n);
  int len = n >> levels;
  for (int l = 0; l < levels; ++l) {
    len *= 2;
    detail::idwt_step(c.data(), len, tmp.data());
    c.head(len) = tmp.head(len);
  }
  return c;
}

}  // namespace illposed
