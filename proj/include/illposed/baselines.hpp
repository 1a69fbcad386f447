#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "illposed/errors.hpp"
#include "illposed/laguerre.hpp"
#include "illposed/problem.hpp"

namespace illposed {

enum class BaselineMethod { SVD, Laguerre };

struct BaselineEstimate {
  Vector f_hat;
  BaselineMethod method = BaselineMethod::SVD;
  int tuning = 1;       // K_s or K_L
  bool oracle = false;  // tuned against the true signal
  double scale_b = 1.0;
  double error = 0.0;  // n^{-1/2}‖f̂ - f‖₂ when oracle-tuned
};

/// Spectral cutoff inversion: f̂ = Σ_{i<K} (u_iᵀy/σ_i)·v_i. The factorization
/// is the expensive part, so it is reusable across observations.
class TruncatedSvd {
public:
  explicit TruncatedSvd(const Matrix& Q) {
    Eigen::JacobiSVD<Matrix> svd(Q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_ = svd.matrixU();
    V_ = svd.matrixV();
    s_ = svd.singularValues();
    max_usable_ = 0;
    const double floor = 1e-14 * s_[0];
    for (int i = 0; i < s_.size(); ++i)
      if (s_[i] > floor) max_usable_ = i + 1;
  }

  int max_usable() const { return max_usable_; }
  const Vector& singular_values() const { return s_; }
  const Matrix& matrixU() const { return U_; }
  const Matrix& matrixV() const { return V_; }

  Vector estimate(const Vector& y, int K) const {
    check_K(K);
    Vector f = Vector::Zero(V_.rows());
    for (int i = 0; i < K; ++i) f += (U_.col(i).dot(y) / s_[i]) * V_.col(i);
    return f;
  }

  /// Errors n^{-1/2}‖f̂_K - f‖ for K = 1..Kmax in one cumulative pass.
  std::vector<double> oracle_errors(const Vector& y, const Vector& f_true, int Kmax) const {
    check_K(Kmax);
    std::vector<double> errs;
    errs.reserve(Kmax);
    Vector f = Vector::Zero(V_.rows());
    const double rn = std::sqrt(static_cast<double>(f_true.size()));
    for (int i = 0; i < Kmax; ++i) {
      f += (U_.col(i).dot(y) / s_[i]) * V_.col(i);
      errs.push_back((f - f_true).norm() / rn);
    }
    return errs;
  }

private:
  void check_K(int K) const {
    if (K < 1 || K > s_.size())
      throw std::invalid_argument("truncated svd: K out of range");
    if (K > max_usable_)
      throw truncation_limit_error("truncated svd: singular values below cutoff", max_usable_);
  }

  Matrix U_, V_;
  Vector s_;
  int max_usable_ = 0;
};

inline Vector truncated_svd_estimator(const Matrix& Q, const Vector& y, int K) {
  return TruncatedSvd(Q).estimate(y, K);
}

/// Least-squares fit of y by Q·[φ_{0,b} ... φ_{K-1,b}] in data space. One
/// unpivoted QR of the widest design serves every K prefix.
class LaguerreDesign {
public:
  LaguerreDesign(const Matrix& Q, const Grid& grid, int Kmax, double b) : b_(b) {
    if (Kmax < 1 || Kmax > grid.n)
      throw std::invalid_argument("laguerre design: K must be in [1, n]");
    L_.resize(grid.n, Kmax);
    for (int k = 0; k < Kmax; ++k)
      for (int i = 0; i < grid.n; ++i) L_(i, k) = laguerre_function(k, b, grid.points[i]);
    const Matrix QL = Q * L_;
    Eigen::HouseholderQR<Matrix> qr(QL);
    Qfac_ = qr.householderQ() * Matrix::Identity(grid.n, Kmax);
    R_ = qr.matrixQR().topRows(Kmax).triangularView<Eigen::Upper>();
    double rmax = 0.0;
    for (int k = 0; k < Kmax; ++k) rmax = std::max(rmax, std::abs(R_(k, k)));
    rank_ = 0;
    for (int k = 0; k < Kmax; ++k)
      if (std::abs(R_(k, k)) > 1e-12 * rmax) rank_ = k + 1;  // prefix rank
      else break;
  }

  int Kmax() const { return static_cast<int>(R_.rows()); }
  int rank() const { return rank_; }
  double scale() const { return b_; }

  Vector estimate(const Vector& y, int K) const {
    if (K < 1 || K > Kmax()) throw std::invalid_argument("laguerre design: K out of range");
    if (K > rank_)
      throw rank_deficiency_error("laguerre design: Q·L is rank deficient", rank_);
    const Vector t = Qfac_.leftCols(K).transpose() * y;
    const Vector c = R_.topLeftCorner(K, K).triangularView<Eigen::Upper>().solve(t);
    return L_.leftCols(K) * c;
  }

private:
  Matrix L_, Qfac_, R_;
  double b_;
  int rank_ = 0;
};

inline Vector laguerre_projection_estimator(const Matrix& Q, const Vector& y, const Grid& grid,
                                            int K, double b) {
  return LaguerreDesign(Q, grid, K, b).estimate(y, K);
}

/// "Ideal" tuning: evaluates the baseline at every K in K_range (and every
/// scale for the Laguerre method) and keeps the minimizer of n^{-1/2}‖f̂ - f‖.
/// Ties go to the smallest K, then the smallest scale. K values that are
/// structurally unusable (past the SVD cutoff or the design rank) are skipped.
inline BaselineEstimate oracle_select(BaselineMethod method, const InverseProblem& pb,
                                      const std::vector<int>& K_range,
                                      const std::vector<double>& scales = {1.0}) {
  if (!pb.f_true) throw oracle_unavailable_error("oracle_select: problem has no true signal");
  if (K_range.empty()) throw std::invalid_argument("oracle_select: empty K range");
  const Vector& f = *pb.f_true;
  const double rn = std::sqrt(static_cast<double>(pb.grid.n));

  BaselineEstimate best;
  best.method = method;
  best.oracle = true;
  bool have = false;

  if (method == BaselineMethod::SVD) {
    TruncatedSvd svd(pb.Q);
    for (int K : K_range) {
      if (K < 1 || K > pb.grid.n || K > svd.max_usable()) continue;
      const Vector fhat = svd.estimate(pb.y, K);
      const double err = (fhat - f).norm() / rn;
      if (!have || err < best.error) {
        best.f_hat = fhat;
        best.tuning = K;
        best.error = err;
        have = true;
      }
    }
  } else {
    int Kmax = 1;
    for (int K : K_range) Kmax = std::max(Kmax, std::min(K, pb.grid.n));
    std::vector<LaguerreDesign> designs;
    designs.reserve(scales.size());
    for (double b : scales) designs.emplace_back(pb.Q, pb.grid, Kmax, b);
    for (int K : K_range) {
      for (const auto& design : designs) {
        if (K < 1 || K > design.rank()) continue;
        const Vector fhat = design.estimate(pb.y, K);
        const double err = (fhat - f).norm() / rn;
        if (!have || err < best.error) {
          best.f_hat = fhat;
          best.tuning = K;
          best.scale_b = design.scale();
          best.error = err;
          have = true;
        }
      }
    }
  }
  if (!have) throw truncation_limit_error("oracle_select: no usable K in range", 0);
  return best;
}

}  // namespace illposed
