#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "illposed/dictionary.hpp"
#include "illposed/lasso.hpp"
#include "illposed/wavelet.hpp"

namespace illposed {

struct PilotEstimate {
  Vector q_hat;
  double threshold = 0.0;  // σ_eff·√(2 log n)
  int kept_coeffs = 0;     // detail coefficients surviving the threshold
};

/// Wavelet pilot estimate of q: hard universal thresholding of the detail
/// coefficients at σ_eff·√(2 log n); the coarsest approximation block
/// (4 coefficients) passes through untouched.
inline PilotEstimate pilot_estimate_q(const Vector& y, double sigma_eff) {
  const int n = static_cast<int>(y.size());
  const int levels = max_dwt_levels(n);
  const double lambda = sigma_eff * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  Vector c = dwt_forward(y, levels);
  const int approx_len = n >> levels;
  int kept = 0;
  for (int i = approx_len; i < n; ++i) {
    if (std::abs(c[i]) <= lambda)
      c[i] = 0.0;
    else
      ++kept;
  }
  PilotEstimate pilot;
  pilot.q_hat = dwt_inverse(c, levels);
  pilot.threshold = lambda;
  pilot.kept_coeffs = kept;
  return pilot;
}

/// Translation-invariant variant: the same hard universal threshold applied
/// over every cyclic shift of the data, reconstructions averaged. Smoother
/// pilot, at the price of exact idempotence.
inline PilotEstimate pilot_estimate_q_ti(const Vector& y, double sigma_eff) {
  const int n = static_cast<int>(y.size());
  const int levels = max_dwt_levels(n);
  const double lambda = sigma_eff * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  const int approx_len = n >> levels;
  Vector acc = Vector::Zero(n);
  long kept = 0;
  Vector shifted(n);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < n; ++i) shifted[i] = y[(i + s) % n];
    Vector c = dwt_forward(shifted, levels);
    for (int i = approx_len; i < n; ++i) {
      if (std::abs(c[i]) <= lambda)
        c[i] = 0.0;
      else
        ++kept;
    }
    const Vector back = dwt_inverse(c, levels);
    for (int i = 0; i < n; ++i) acc[(i + s) % n] += back[i];
  }
  PilotEstimate pilot;
  pilot.q_hat = acc / n;
  pilot.threshold = lambda;
  pilot.kept_coeffs = static_cast<int>((kept + n / 2) / n);  // per-shift average
  return pilot;
}

struct SelectionResult {
  int k_hat = 0;  // index into path.fits
  double alpha_hat = 0.0;
  Vector criterion_values;
};

enum class CriterionSpace {
  Image,        // compare QΦθ̂ with q̂ (both live in data space)
  Coefficient,  // compare Φθ̂ with q̂ (alternative reading, kept behind this flag)
};

/// Model-size-penalized selection over the path:
/// criterion(k) = n⁻¹‖Wθ̂(α_k) - q̂‖² + 2σ_eff²·n⁻¹·|supp θ̂(α_k)|,
/// with W the precomputed image operator. Ties go to the smallest index.
inline SelectionResult cp_select_on(const LassoPath& path, const Matrix& W,
                                    const Vector& q_hat, double sigma_eff) {
  if (path.fits.empty()) throw std::invalid_argument("cp_select: empty path");
  const int N = static_cast<int>(path.fits.size());
  const double n = static_cast<double>(q_hat.size());
  SelectionResult sel;
  sel.criterion_values.resize(N);
  int best = 0;
  for (int k = 0; k < N; ++k) {
    const auto& fit = path.fits[k];
    const double fit_term = (W * fit.theta - q_hat).squaredNorm() / n;
    const double penalty = 2.0 * sigma_eff * sigma_eff * fit.support.size() / n;
    sel.criterion_values[k] = fit_term + penalty;
    if (sel.criterion_values[k] < sel.criterion_values[best]) best = k;
  }
  sel.k_hat = best;
  sel.alpha_hat = path.fits[best].alpha;
  return sel;
}

inline SelectionResult cp_select(const LassoPath& path, const Matrix& Q, const Dictionary& dict,
                                 const Vector& q_hat, double sigma_eff,
                                 CriterionSpace space = CriterionSpace::Image) {
  const Matrix W = (space == CriterionSpace::Image) ? Matrix(Q * dict.Phi) : dict.Phi;
  return cp_select_on(path, W, q_hat, sigma_eff);
}

struct RefitSelection {
  SelectionResult selection;
  Vector theta;  // least-squares coefficients on the selected support
  Vector f_hat;  // Φ_S·c_S
};

/// Gauss-Lasso variant: the path supplies candidate supports; each distinct
/// support S is refit by unpenalized least squares in data space
/// (min_c ‖(QΦ)_S c - y‖₂²) and ranked by the same criterion. The p̂ degrees
/// of freedom in the penalty are exact for these projection fits, which is
/// what the 2σ²p̂/n form assumes.
inline RefitSelection cp_select_refit(const LassoPath& path, const Matrix& W, const Matrix& Phi,
                                      const Vector& y, const Vector& q_hat, double sigma_eff) {
  if (path.fits.empty()) throw std::invalid_argument("cp_select_refit: empty path");
  const int N = static_cast<int>(path.fits.size());
  const int n = static_cast<int>(q_hat.size());
  const double dn = static_cast<double>(n);

  RefitSelection out;
  out.selection.criterion_values.resize(N);
  int best = -1;
  double best_crit = std::numeric_limits<double>::infinity();

  const std::vector<int>* prev = nullptr;
  double crit = 0.0;
  Vector theta_cur, fhat_cur;
  for (int k = 0; k < N; ++k) {
    const auto& S = path.fits[k].support;
    if (prev == nullptr || S != *prev) {
      const int s = static_cast<int>(S.size());
      theta_cur = Vector::Zero(Phi.cols());
      if (s == 0) {
        fhat_cur = Vector::Zero(Phi.rows());
        crit = q_hat.squaredNorm() / dn;
      } else {
        Matrix Ws(n, s), Phis(Phi.rows(), s);
        for (int a = 0; a < s; ++a) {
          Ws.col(a) = W.col(S[a]);
          Phis.col(a) = Phi.col(S[a]);
        }
        const Vector coef = Ws.householderQr().solve(y);
        for (int a = 0; a < s; ++a) theta_cur[S[a]] = coef[a];
        fhat_cur = Phis * coef;
        crit = (Ws * coef - q_hat).squaredNorm() / dn +
               2.0 * sigma_eff * sigma_eff * s / dn;
      }
      prev = &S;
    }
    out.selection.criterion_values[k] = crit;
    if (crit < best_crit) {
      best_crit = crit;
      best = k;
      out.theta = theta_cur;
      out.f_hat = fhat_cur;
    }
  }
  out.selection.k_hat = best;
  out.selection.alpha_hat = path.fits[best].alpha;
  return out;
}

inline Vector estimate_f(const LassoFit& fit, const Dictionary& dict) {
  if (fit.theta.size() != dict.p()) throw std::invalid_argument("estimate_f: dimension mismatch");
  return dict.Phi * fit.theta;
}

}  // namespace illposed
