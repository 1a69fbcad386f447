#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

#include "illposed/dictionary.hpp"
#include "illposed/errors.hpp"
#include "illposed/problem.hpp"

namespace illposed {

namespace detail {

inline bool is_lower_triangular(const Matrix& Q) {
  for (int j = 1; j < Q.cols(); ++j)
    for (int i = 0; i < j && i < Q.rows(); ++i)
      if (Q(i, j) != 0.0) return false;
  return true;
}

inline void check_triangular_pivots(const Matrix& Q, const char* who) {
  double pmin = std::abs(Q(0, 0));
  for (int i = 1; i < Q.rows(); ++i) pmin = std::min(pmin, std::abs(Q(i, i)));
  if (pmin <= 1e-14) throw singular_operator_error(std::string(who) + ": operator is singular", pmin);
}

inline void check_lu_pivots(const Eigen::PartialPivLU<Matrix>& lu, const char* who) {
  const auto& U = lu.matrixLU();
  double pmin = std::abs(U(0, 0));
  for (int i = 1; i < U.rows(); ++i) pmin = std::min(pmin, std::abs(U(i, i)));
  if (pmin <= 1e-14) throw singular_operator_error(std::string(who) + ": operator is singular", pmin);
}

}  // namespace detail

/// Solves QᵀΨ = Φ column by column. For the lower-triangular convolution
/// operators this is a back-substitution on Qᵀ; a dense invertible Q falls
/// back to an LU factorization.
inline Matrix compute_inverse_images(const Matrix& Q, const Matrix& Phi) {
  if (Q.rows() != Q.cols() || Q.rows() != Phi.rows())
    throw std::invalid_argument("compute_inverse_images: dimension mismatch");
  if (detail::is_lower_triangular(Q)) {
    detail::check_triangular_pivots(Q, "compute_inverse_images");
    return Q.transpose().triangularView<Eigen::Upper>().solve(Phi);
  }
  Eigen::PartialPivLU<Matrix> lu(Q.transpose());
  detail::check_lu_pivots(lu, "compute_inverse_images");
  return lu.solve(Phi);
}

inline Matrix compute_inverse_images(const Matrix& Q, const Dictionary& dict) {
  return compute_inverse_images(Q, dict.Phi);
}

/// ν_j = ‖ψ_j‖₂, the noise amplification of atom j.
inline Vector compute_weights(const Matrix& Psi) {
  Vector nu(Psi.cols());
  for (int j = 0; j < Psi.cols(); ++j) {
    nu[j] = Psi.col(j).norm();
    if (nu[j] == 0.0)
      throw degenerate_weight_error("compute_weights: column " + std::to_string(j) +
                                    " has zero norm");
  }
  return nu;
}

/// Surrogate data z with Φᵀz = Ψᵀy, computed as the solution of Qz = y.
/// For invertible Q this coincides with z = (ΦΦᵀ)^{-1}ΦΨᵀy since Ψᵀ = ΦᵀQ^{-1}.
inline Vector compute_surrogate(const Matrix& Q, const Vector& y) {
  if (Q.rows() != Q.cols() || Q.rows() != y.size())
    throw std::invalid_argument("compute_surrogate: dimension mismatch");
  if (detail::is_lower_triangular(Q)) {
    detail::check_triangular_pivots(Q, "compute_surrogate");
    return Q.triangularView<Eigen::Lower>().solve(y);
  }
  Eigen::PartialPivLU<Matrix> lu(Q);
  detail::check_lu_pivots(lu, "compute_surrogate");
  return lu.solve(y);
}

struct CovarianceForm {
  Matrix G;  // ΦᵀΦ
  Vector b;  // Ψᵀy
};

/// The Lasso quadratic tᵀGt - 2tᵀb differs from ‖Φt - z‖² by the constant ‖z‖².
inline CovarianceForm compute_covariance_form(const Matrix& Phi, const Matrix& Psi,
                                              const Vector& y) {
  if (Phi.rows() != Psi.rows() || Phi.cols() != Psi.cols() || Psi.rows() != y.size())
    throw std::invalid_argument("compute_covariance_form: dimension mismatch");
  CovarianceForm cf;
  cf.G = Phi.transpose() * Phi;
  cf.b = Psi.transpose() * y;
  return cf;
}

/// Base penalty level α₀ = σ_eff·√(2(τ+1)·log(p)/n) with σ_eff = σ·√(T/n),
/// the per-sample noise std of the discrete observation model.
inline double alpha0(double sigma, const Grid& grid, int p, double tau) {
  if (p < 2) throw std::invalid_argument("alpha0: p must be >= 2");
  if (tau <= 0.0) throw std::invalid_argument("alpha0: tau must be positive");
  const double sigma_eff = sigma * std::sqrt(grid.T / grid.n);
  return sigma_eff * std::sqrt(2.0 * (tau + 1.0) * std::log(static_cast<double>(p)) / grid.n);
}

/// Everything the weighted Lasso and its diagnostics consume; the solver
/// works on (G, b) and never touches z.
struct PreconditionedSystem {
  Matrix Psi;
  Vector nu;
  Matrix G;
  Vector b;
  Vector z;
  double sigma = 0.0;
  double sigma_eff = 0.0;
  double tau = 1.0;
  double alpha0 = 0.0;
};

inline PreconditionedSystem precondition(const InverseProblem& pb, const Dictionary& dict,
                                         double tau = 1.0) {
  PreconditionedSystem sys;
  sys.Psi = compute_inverse_images(pb.Q, dict.Phi);
  sys.nu = compute_weights(sys.Psi);
  auto cf = compute_covariance_form(dict.Phi, sys.Psi, pb.y);
  sys.G = std::move(cf.G);
  sys.b = std::move(cf.b);
  sys.z = compute_surrogate(pb.Q, pb.y);
  sys.sigma = pb.sigma;
  sys.sigma_eff = pb.noise_scale();
  sys.tau = tau;
  sys.alpha0 = alpha0(pb.sigma, pb.grid, dict.p(), tau);
  return sys;
}

}  // namespace illposed
