#pragma once

#include <cmath>
#include <stdexcept>

namespace illposed {

/// L_k(x) by the three-term recurrence (k+1)L_{k+1} = (2k+1-x)L_k - kL_{k-1}.
inline double laguerre_polynomial(int degree, double x) {
  if (degree < 0 || degree > 60)
    throw std::invalid_argument("laguerre_polynomial: degree must be in [0, 60]");
  double lkm1 = 1.0;  // L_0
  if (degree == 0) return lkm1;
  double lk = 1.0 - x;  // L_1
  for (int k = 1; k < degree; ++k) {
    const double lkp1 = ((2.0 * k + 1.0 - x) * lk - k * lkm1) / (k + 1.0);
    lkm1 = lk;
    lk = lkp1;
  }
  return lk;
}

/// Laguerre function φ_{degree,b}(x) = e^{-bx/2} L_degree(bx).
inline double laguerre_function(int degree, double b, double x) {
  if (b <= 0.0) throw std::invalid_argument("laguerre_function: scale b must be positive");
  return std::exp(-0.5 * b * x) * laguerre_polynomial(degree, b * x);
}

}  // namespace illposed
