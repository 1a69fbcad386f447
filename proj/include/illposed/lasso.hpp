#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "illposed/errors.hpp"

namespace illposed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct LassoFit {
  Vector theta;
  double alpha = 0.0;
  std::vector<int> support;  // exact nonzero pattern of theta
  double kkt_residual = 0.0;
  int iterations = 0;  // full coordinate sweeps
  bool converged = false;
};

struct LassoOptions {
  double tol = 1e-9;
  int max_iter = 100000;
  bool warm_start = true;  // path only; fits restart from zero when disabled
};

inline double soft_threshold(double x, double thr) {
  if (x > thr) return x - thr;
  if (x < -thr) return x + thr;
  return 0.0;
}

/// Covariance-form objective F(t) = tᵀGt - 2tᵀb + αΣ_j ν_j|t_j|; equals
/// ‖Φt - z‖² + α‖Υt‖₁ minus the constant ‖z‖².
inline double lasso_objective(const Vector& theta, const Matrix& G, const Vector& b,
                              const Vector& nu, double alpha) {
  return theta.dot(G * theta) - 2.0 * theta.dot(b) +
         alpha * (nu.array() * theta.array().abs()).sum();
}

/// Smallest α at which θ = 0 satisfies the stationarity condition:
/// max_j 2|b_j|/ν_j. Ties resolve to the smallest index (not observable in
/// the value, but documented for the restricted-fit path).
inline double alpha_max(const Vector& b, const Vector& nu) {
  if (b.size() != nu.size()) throw std::invalid_argument("alpha_max: dimension mismatch");
  double amax = 0.0;
  for (int j = 0; j < b.size(); ++j) {
    if (nu[j] <= 0.0) throw std::invalid_argument("alpha_max: weights must be positive");
    amax = std::max(amax, 2.0 * std::abs(b[j]) / nu[j]);
  }
  return amax;
}

namespace detail {

// Stationarity violation of F at theta, given grad = Gθ - b.
inline double kkt_from_gradient(const Vector& theta, const Vector& grad, const Vector& nu,
                                double alpha) {
  double r = 0.0;
  for (int j = 0; j < theta.size(); ++j) {
    const double g2 = 2.0 * grad[j];
    if (theta[j] > 0.0)
      r = std::max(r, std::abs(g2 + alpha * nu[j]));
    else if (theta[j] < 0.0)
      r = std::max(r, std::abs(g2 - alpha * nu[j]));
    else
      r = std::max(r, std::max(0.0, std::abs(g2) - alpha * nu[j]));
  }
  return r;
}

}  // namespace detail

/// Max stationarity violation: on the support |2(Gθ-b)_j + αν_j·sign(θ_j)|,
/// off it max(0, |2(Gθ-b)_j| - αν_j).
inline double kkt_residual(const Vector& theta, const Matrix& G, const Vector& b,
                           const Vector& nu, double alpha) {
  if (theta.size() != b.size() || G.rows() != b.size())
    throw std::invalid_argument("kkt_residual: dimension mismatch");
  const Vector grad = G * theta - b;
  return detail::kkt_from_gradient(theta, grad, nu, alpha);
}

/// Cyclic coordinate descent on F(t) = tᵀGt - 2tᵀb + αΣν_j|t_j| with the
/// exact single-coordinate update t_j ← soft(b_j - Σ_{k≠j}G_{jk}t_k, αν_j/2)/G_jj.
/// A sweep whose largest coordinate move is below tol triggers an exact
/// gradient recomputation; the fit is converged once the KKT residual is
/// below tol·max(1, ‖b‖_∞). Non-convergence is reported, not thrown.
inline LassoFit weighted_lasso(const Matrix& G, const Vector& b, const Vector& nu,
                               double alpha, const Vector& init,
                               const LassoOptions& opts = {}) {
  const int p = static_cast<int>(b.size());
  if (G.rows() != p || G.cols() != p || nu.size() != p)
    throw std::invalid_argument("weighted_lasso: dimension mismatch");
  if (alpha < 0.0) throw std::invalid_argument("weighted_lasso: alpha must be >= 0");
  for (int j = 0; j < p; ++j) {
    if (G(j, j) <= 0.0)
      throw degenerate_atom_error("weighted_lasso: nonpositive Gram diagonal at " +
                                  std::to_string(j));
    if (nu[j] <= 0.0) throw std::invalid_argument("weighted_lasso: weights must be positive");
  }

  LassoFit fit;
  fit.alpha = alpha;
  fit.theta = (init.size() == p) ? init : Vector::Zero(p);

  const double kkt_tol = opts.tol * std::max(1.0, b.lpNorm<Eigen::Infinity>());
  Vector grad = G * fit.theta - b;

  double kkt = detail::kkt_from_gradient(fit.theta, grad, nu, alpha);
  if (kkt <= kkt_tol) {
    fit.converged = true;
  } else {
    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
      double max_change = 0.0;
      for (int j = 0; j < p; ++j) {
        const double old = fit.theta[j];
        const double c = G(j, j) * old - grad[j];  // b_j - Σ_{k≠j} G_{jk} t_k
        const double next = soft_threshold(c, 0.5 * alpha * nu[j]) / G(j, j);
        const double d = next - old;
        if (d != 0.0) {
          grad.noalias() += d * G.col(j);
          fit.theta[j] = next;
          max_change = std::max(max_change, std::abs(d));
        }
      }
      fit.iterations = sweep;
      if (max_change <= opts.tol) {
        grad.noalias() = G * fit.theta - b;  // drop the incremental-update drift
        kkt = detail::kkt_from_gradient(fit.theta, grad, nu, alpha);
        if (kkt <= kkt_tol) {
          fit.converged = true;
          break;
        }
      }
    }
    if (!fit.converged) {
      grad.noalias() = G * fit.theta - b;
      kkt = detail::kkt_from_gradient(fit.theta, grad, nu, alpha);
    }
  }

  fit.kkt_residual = kkt;
  for (int j = 0; j < p; ++j)
    if (fit.theta[j] != 0.0) fit.support.push_back(j);
  return fit;
}

struct LassoPath {
  Vector alphas;  // strictly decreasing, alphas[0] = alpha_max
  std::vector<LassoFit> fits;
  double alpha_max = 0.0;
};

/// Traces α_k = α_max·k/N from k = N down to 1 with warm starts. The top of
/// the path is the zero fit by construction of α_max.
inline LassoPath lasso_path(const Matrix& G, const Vector& b, const Vector& nu, int N,
                            const LassoOptions& opts = {}) {
  if (N < 2) throw std::invalid_argument("lasso_path: N must be >= 2");
  LassoPath path;
  path.alpha_max = alpha_max(b, nu);
  if (path.alpha_max <= 0.0)
    throw std::invalid_argument("lasso_path: alpha_max is zero (b vanishes); no path to trace");
  path.alphas.resize(N);
  path.fits.reserve(N);
  Vector warm = Vector::Zero(b.size());
  for (int k = N; k >= 1; --k) {
    const double a = path.alpha_max * k / N;
    path.alphas[N - k] = a;
    LassoFit fit = weighted_lasso(G, b, nu, a, opts.warm_start ? warm : Vector::Zero(b.size()),
                                  opts);
    if (opts.warm_start) warm = fit.theta;
    path.fits.push_back(std::move(fit));
  }
  return path;
}

struct RestrictedFit {
  LassoFit fit;
  bool fallback = false;  // no path point satisfied the cardinality bound
};

/// Path-based relaxation of the cardinality-restricted problem: the fit with
/// the smallest α among path fits with |support| ≤ s. The exact ℓ₀-constrained
/// minimizer is NP-hard; this keeps ‖θ̂‖₀ ≤ s deterministically, which is all
/// the restricted oracle bound needs.
inline RestrictedFit cardinality_restricted_fit(const LassoPath& path, int s) {
  if (s < 0) throw std::invalid_argument("cardinality_restricted_fit: s must be >= 0");
  if (path.fits.empty()) throw std::invalid_argument("cardinality_restricted_fit: empty path");
  for (auto it = path.fits.rbegin(); it != path.fits.rend(); ++it)
    if (static_cast<int>(it->support.size()) <= s) return {*it, false};
  return {path.fits.front(), true};
}

}  // namespace illposed
