#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "illposed/dictionary.hpp"
#include "illposed/errors.hpp"
#include "illposed/lasso.hpp"
#include "illposed/rng.hpp"

namespace illposed {

struct RestrictedEigenvalues {
  double lamin = 0.0;
  double lamax = 0.0;
};

namespace detail {

inline double binomial_capped(int p, int m, double cap) {
  double v = 1.0;
  for (int i = 0; i < m; ++i) {
    v *= static_cast<double>(p - i) / (i + 1);
    if (v > cap) return cap + 1.0;
  }
  return v;
}

inline RestrictedEigenvalues support_eigenvalues(const Matrix& G, const std::vector<int>& J) {
  const int m = static_cast<int>(J.size());
  Matrix sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) sub(a, c) = G(J[a], J[c]);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sub, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

// Projects v onto the ℓ₁ ball of the given radius (Duchi et al. style).
inline void project_l1_ball(Eigen::Ref<Vector> v, double radius) {
  const int n = static_cast<int>(v.size());
  double l1 = v.cwiseAbs().sum();
  if (l1 <= radius || n == 0) return;
  std::vector<double> mag(n);
  for (int i = 0; i < n; ++i) mag[i] = std::abs(v[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += mag[i];
    const double t = (cum - radius) / (i + 1);
    if (t >= ((i + 1 < n) ? mag[i + 1] : 0.0)) {
      theta = t;
      break;
    }
  }
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(v[i]) - theta;
    v[i] = (a > 0.0) ? (v[i] > 0 ? a : -a) : 0.0;
  }
}

}  // namespace detail

/// Exact restricted eigenvalues of ΦᵀΦ over every support of size m. The
/// extrema over ‖t‖₀ ≤ m are attained on size-m supports, so enumerating
/// those suffices. Guarded by an enumeration budget; use the probe variant
/// beyond it.
inline RestrictedEigenvalues restricted_eigenvalues(const Matrix& Phi, int m,
                                                    double enumeration_cap = 2e6) {
  const int p = static_cast<int>(Phi.cols());
  if (m < 1 || m > p) throw std::invalid_argument("restricted_eigenvalues: m out of range");
  if (m > 14)
    throw capacity_error("restricted_eigenvalues: m > 14; use restricted_eigenvalue_probe");
  if (detail::binomial_capped(p, m, enumeration_cap) > enumeration_cap)
    throw capacity_error("restricted_eigenvalues: C(p, m) exceeds the enumeration budget; "
                         "use restricted_eigenvalue_probe");
  const Matrix G = Phi.transpose() * Phi;
  std::vector<int> J(m);
  std::iota(J.begin(), J.end(), 0);
  RestrictedEigenvalues out{std::numeric_limits<double>::infinity(), 0.0};
  while (true) {
    const auto ev = detail::support_eigenvalues(G, J);
    out.lamin = std::min(out.lamin, ev.lamin);
    out.lamax = std::max(out.lamax, ev.lamax);
    // next combination in lexicographic order
    int i = m - 1;
    while (i >= 0 && J[i] == p - m + i) --i;
    if (i < 0) break;
    ++J[i];
    for (int k = i + 1; k < m; ++k) J[k] = J[k - 1] + 1;
  }
  return out;
}

/// Randomized bracket: min/max eigenvalues over n_probes random size-m
/// supports. Returns an upper bound on λ_min and a lower bound on λ_max.
inline RestrictedEigenvalues restricted_eigenvalue_probe(const Matrix& Phi, int m, int n_probes,
                                                         std::uint64_t seed) {
  const int p = static_cast<int>(Phi.cols());
  if (m < 1 || m > p) throw std::invalid_argument("restricted_eigenvalue_probe: m out of range");
  if (n_probes < 1) throw std::invalid_argument("restricted_eigenvalue_probe: n_probes >= 1");
  const Matrix G = Phi.transpose() * Phi;
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  RestrictedEigenvalues out{std::numeric_limits<double>::infinity(), 0.0};
  auto eng = substream(seed, 0);
  std::vector<int> J(m);
  for (int t = 0; t < n_probes; ++t) {
    for (int i = 0; i < m; ++i) {  // partial Fisher-Yates
      const int r = i + static_cast<int>(eng() % static_cast<std::uint64_t>(p - i));
      std::swap(idx[i], idx[r]);
      J[i] = idx[i];
    }
    const auto ev = detail::support_eigenvalues(G, J);
    out.lamin = std::min(out.lamin, ev.lamin);
    out.lamax = std::max(out.lamax, ev.lamax);
  }
  return out;
}

/// Heuristic estimate of the compatibility constant
///   κ²(μ,J) = min { dᵀΦᵀΦd·Σ_{j∈J}ν_j² / ‖(Υd)_J‖₁² : ‖(Υd)_{Jᶜ}‖₁ ≤ μ‖(Υd)_J‖₁ }
/// by projected gradient descent from random cone starts. Every iterate is a
/// feasible evaluation point, so the reported minimum upper-bounds κ²; it is
/// an estimate, not a certificate.
inline double compatibility_lower_bound(const Matrix& Phi, const Vector& nu, double mu,
                                        const std::vector<int>& J, int n_probes,
                                        std::uint64_t seed) {
  const int p = static_cast<int>(Phi.cols());
  if (J.empty()) throw std::invalid_argument("compatibility_lower_bound: J must be nonempty");
  if (mu <= 1.0) throw std::invalid_argument("compatibility_lower_bound: mu must exceed 1");
  std::vector<bool> inJ(p, false);
  for (int j : J) inJ[j] = true;

  // Work in e = Υd coordinates: ratio = eᵀHe·trJ / ‖e_J‖₁² with
  // H = Υ^{-1}ΦᵀΦΥ^{-1}, cone ‖e_{Jᶜ}‖₁ ≤ μ‖e_J‖₁.
  const Vector inv_nu = nu.cwiseInverse();
  const Matrix H = inv_nu.asDiagonal() * (Phi.transpose() * Phi) * inv_nu.asDiagonal();
  double trJ = 0.0;
  for (int j : J) trJ += nu[j] * nu[j];

  const int nc = p - static_cast<int>(J.size());
  std::vector<int> Jc;
  Jc.reserve(nc);
  for (int j = 0; j < p; ++j)
    if (!inJ[j]) Jc.push_back(j);

  const double hnorm = std::max(H.norm(), 1e-300);
  double best = std::numeric_limits<double>::infinity();

  auto l1_on = [&](const Vector& e, const std::vector<int>& S) {
    double v = 0.0;
    for (int j : S) v += std::abs(e[j]);
    return v;
  };
  // rescale into the cone and normalize ‖e_J‖₁ = 1 for conditioning
  auto make_feasible = [&](Vector& e) -> bool {
    double sJ = l1_on(e, J);
    if (sJ <= 1e-300) return false;
    e /= sJ;
    if (!Jc.empty() && l1_on(e, Jc) > mu) {
      Vector sub(nc);
      for (int i = 0; i < nc; ++i) sub[i] = e[Jc[i]];
      detail::project_l1_ball(sub, mu);
      for (int i = 0; i < nc; ++i) e[Jc[i]] = sub[i];
    }
    return true;
  };
  auto ratio = [&](const Vector& e) { return e.dot(H * e) * trJ; };  // ‖e_J‖₁ = 1

  // descend the scale-invariant ratio N/D, N = trJ·eᵀHe, D = ‖e_J‖₁²
  auto descend = [&](Vector e) {
    if (!make_feasible(e)) return;
    double current = ratio(e);
    best = std::min(best, current);
    double step = 0.5 / hnorm;
    for (int it = 0; it < 500 && step * hnorm > 1e-12; ++it) {
      const Vector He = H * e;
      Vector grad = 2.0 * trJ * He;  // ∇N with D = 1
      const double N = trJ * e.dot(He);
      for (int j : J) grad[j] -= 2.0 * N * ((e[j] > 0) - (e[j] < 0));  // - N·∂D
      Vector trial = e - step * grad;
      if (!make_feasible(trial)) break;
      const double value = ratio(trial);
      if (value < current) {
        e = std::move(trial);
        current = value;
        best = std::min(best, current);
        step *= 1.4;
      } else {
        step *= 0.5;
      }
    }
  };

  // canonical cone points first: the J indicator and each J singleton
  {
    Vector e = Vector::Zero(p);
    for (int j : J) e[j] = 1.0;
    descend(e);
    for (int j : J) descend(Vector(Vector::Unit(p, j)));
  }
  for (int start = 0; start < n_probes; ++start) {
    GaussianSampler gauss(seed, static_cast<std::uint64_t>(start));
    Vector e = Vector::Zero(p);
    for (int j : J) e[j] = gauss();
    const double spread = gauss.uniform();
    for (int j : Jc) e[j] = spread * gauss();
    descend(std::move(e));
  }
  return best;
}

/// Greedy forward approximation of the projection-criterion minimizer
///   J* = argmin_J n⁻¹‖f - proj_{span Φ_J} f‖² + K₀α²Σ_{j∈J}ν_j².
/// Atoms are added while the criterion strictly decreases, up to max_size.
inline std::vector<int> greedy_support_selection(const Matrix& Phi, const Vector& nu,
                                                 const Vector& f, double alpha, double K0,
                                                 int max_size) {
  const int n = static_cast<int>(Phi.rows());
  const int p = static_cast<int>(Phi.cols());
  const double dn = static_cast<double>(n);
  std::vector<int> J;
  Matrix basis(n, std::min(max_size, p));
  int t = 0;
  Vector r = f;
  std::vector<bool> used(p, false);
  while (t < max_size) {
    int best_j = -1;
    double best_change = 0.0;
    Vector best_u;
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      Vector u = Phi.col(j);
      if (t > 0) u -= basis.leftCols(t) * (basis.leftCols(t).transpose() * u);
      const double un = u.norm();
      if (un < 1e-12) continue;  // already in the span
      u /= un;
      const double gain = u.dot(r);
      const double change = -(gain * gain) / dn + K0 * alpha * alpha * nu[j] * nu[j];
      if (change < best_change) {
        best_change = change;
        best_j = j;
        best_u = u;
      }
    }
    if (best_j < 0) break;
    J.push_back(best_j);
    used[best_j] = true;
    basis.col(t) = best_u;
    r -= best_u * best_u.dot(r);
    ++t;
  }
  std::sort(J.begin(), J.end());
  return J;
}

/// n ≥ C₁·δ⁻²·s·log(e·p/s) — the sample-size condition for sub-gaussian
/// dictionaries; C₁ is a user parameter standing in for the unspecified
/// universal constant.
inline bool sample_size_check(int n, int p, int s, double delta, double C1) {
  if (n < 1 || p < 1 || s < 1 || s > p) throw std::invalid_argument("sample_size_check: bad sizes");
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("sample_size_check: delta must be in (0,1)");
  const double rhs = C1 * s * std::log(std::exp(1.0) * p / s) / (delta * delta);
  return static_cast<double>(n) >= rhs;
}

inline Vector project_onto_span(const Matrix& Phi, const std::vector<int>& J, const Vector& f) {
  if (J.empty()) return Vector::Zero(f.size());
  Matrix sub(Phi.rows(), J.size());
  for (std::size_t i = 0; i < J.size(); ++i) sub.col(i) = Phi.col(J[i]);
  Eigen::HouseholderQR<Matrix> qr(sub);
  Matrix Qthin = qr.householderQ() * Matrix::Identity(Phi.rows(), J.size());
  return Qthin * (Qthin.transpose() * f);
}

/// Slow-rate event: n⁻¹‖Φθ̂ - f‖² ≤ min over candidates t of
/// [n⁻¹‖Φt - f‖² + 4αΣ_j ν_j|t_j|].
inline bool slow_oracle_event(const Matrix& Phi, const Vector& theta_hat, const Vector& f_true,
                              std::span<const Vector> candidates, double alpha,
                              const Vector& nu) {
  const double n = static_cast<double>(f_true.size());
  const double lhs = (Phi * theta_hat - f_true).squaredNorm() / n;
  double rhs = std::numeric_limits<double>::infinity();
  for (const Vector& t : candidates) {
    const double v =
        (Phi * t - f_true).squaredNorm() / n + 4.0 * alpha * (nu.array() * t.array().abs()).sum();
    rhs = std::min(rhs, v);
  }
  return lhs <= rhs;
}

/// Fast-rate event: n⁻¹‖Φθ̂ - f‖² ≤ n⁻¹‖f - proj_{span Φ_J} f‖² + K₀α²Σ_{j∈J}ν_j².
inline bool fast_oracle_event(const Matrix& Phi, const Vector& theta_hat, const Vector& f_true,
                              const std::vector<int>& J, double K0, double alpha,
                              const Vector& nu) {
  const double n = static_cast<double>(f_true.size());
  const double lhs = (Phi * theta_hat - f_true).squaredNorm() / n;
  double penalty = 0.0;
  for (int j : J) penalty += nu[j] * nu[j];
  const double rhs =
      (f_true - project_onto_span(Phi, J, f_true)).squaredNorm() / n + K0 * alpha * alpha * penalty;
  return lhs <= rhs;
}

struct ConditionReport {
  double lamin = 0.0;
  double lamax = 0.0;
  int s = 0;
  double delta = 0.0;
  bool con1_holds = false;   // λ_min(2s) ≥ 1-δ for this dictionary
  double con2_freq = 0.0;    // indicator |J*| ≤ s (deterministic per instance)
  double con3_freq = 0.0;    // fraction of supplied fits with ‖θ̂‖₀ ≤ s
  double kappa2_lower = 0.0; // non-certified compatibility estimate on J*
  double K0 = 0.0;
  double C1 = 1.0;
  // echoed inputs
  int n = 0, p = 0;
  double alpha = 0.0, tau = 1.0, mu = 3.0;
  int probes = 0, fits_checked = 0, jstar_size = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;  // restricted eigenvalues enumerated exactly
  bool sample_size_ok = false;
};

struct Theorem1Options {
  double mu = 3.0;
  int probes = 200;
  std::uint64_t seed = 0;
  double C1 = 1.0;
  double tau = 1.0;
  double enumeration_cap = 2e6;
};

/// Empirical instantiation of the Theorem-1 conditions on one dictionary:
/// con1 via restricted eigenvalues at 2s (exhaustive when the enumeration
/// fits the budget, probe mode otherwise), con2 via the greedy J*
/// approximation, con3 over the supplied fits (one per noise replication;
/// the caller aggregates dictionary draws).
inline ConditionReport check_theorem1_conditions(const Dictionary& dict, const Vector& nu,
                                                 double alpha, int s, double delta, double K0,
                                                 std::span<const LassoFit> fits,
                                                 const Vector& f_true,
                                                 const Theorem1Options& opts = {}) {
  const int n = dict.n();
  const int p = dict.p();
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("check_theorem1_conditions: delta must be in (0,1)");
  if (K0 < 4.0 / ((1.0 - delta) * (1.0 - delta)))
    throw std::invalid_argument("check_theorem1_conditions: K0 must be >= 4/(1-delta)^2");
  if (s < 1 || 2 * s > n)
    throw std::invalid_argument("check_theorem1_conditions: need 1 <= s <= n/2");

  ConditionReport rep;
  rep.s = s;
  rep.delta = delta;
  rep.K0 = K0;
  rep.C1 = opts.C1;
  rep.n = n;
  rep.p = p;
  rep.alpha = alpha;
  rep.tau = opts.tau;
  rep.mu = opts.mu;
  rep.probes = opts.probes;
  rep.seed = opts.seed;

  // λ over ‖t‖₀ ≤ 2s reduces to the unrestricted extremes once 2s ≥ p
  const int m = std::min(2 * s, p);
  if (m <= 14 && detail::binomial_capped(p, m, opts.enumeration_cap) <= opts.enumeration_cap) {
    const auto ev = restricted_eigenvalues(dict.Phi, m, opts.enumeration_cap);
    rep.lamin = ev.lamin;
    rep.lamax = ev.lamax;
    rep.exhaustive = true;
  } else {
    const auto ev = restricted_eigenvalue_probe(dict.Phi, m, opts.probes, opts.seed);
    rep.lamin = ev.lamin;
    rep.lamax = ev.lamax;
    rep.exhaustive = false;
  }
  rep.con1_holds = rep.lamin >= 1.0 - delta;

  const auto jstar = greedy_support_selection(dict.Phi, nu, f_true, alpha, K0, n / 2);
  rep.jstar_size = static_cast<int>(jstar.size());
  rep.con2_freq = (rep.jstar_size <= s) ? 1.0 : 0.0;

  rep.fits_checked = static_cast<int>(fits.size());
  if (!fits.empty()) {
    int ok = 0;
    for (const auto& fit : fits)
      if (static_cast<int>(fit.support.size()) <= s) ++ok;
    rep.con3_freq = static_cast<double>(ok) / fits.size();
  } else {
    rep.con3_freq = 1.0;  // vacuous; fits_checked records the empty input
  }

  std::vector<int> kappaJ = jstar;
  if (kappaJ.empty()) {
    // fall back to the single atom most correlated with f
    int jbest = 0;
    double cbest = -1.0;
    for (int j = 0; j < p; ++j) {
      const double c = std::abs(dict.Phi.col(j).dot(f_true));
      if (c > cbest) {
        cbest = c;
        jbest = j;
      }
    }
    kappaJ = {jbest};
  }
  rep.kappa2_lower =
      compatibility_lower_bound(dict.Phi, nu, opts.mu, kappaJ, std::max(1, opts.probes / 10),
                                opts.seed);
  rep.sample_size_ok = sample_size_check(n, p, s, delta, opts.C1);
  return rep;
}

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j;
  j["lamin"] = r.lamin;
  j["lamax"] = r.lamax;
  j["s"] = r.s;
  j["delta"] = r.delta;
  j["con1_holds"] = r.con1_holds;
  j["con2_freq"] = r.con2_freq;
  j["con3_freq"] = r.con3_freq;
  j["kappa2_lower"] = r.kappa2_lower;
  j["kappa2_certified"] = false;
  j["K0"] = r.K0;
  j["C1"] = r.C1;
  j["n"] = r.n;
  j["p"] = r.p;
  j["alpha"] = r.alpha;
  j["tau"] = r.tau;
  j["mu"] = r.mu;
  j["probes"] = r.probes;
  j["fits_checked"] = r.fits_checked;
  j["jstar_size"] = r.jstar_size;
  j["seed"] = r.seed;
  j["exhaustive"] = r.exhaustive;
  j["sample_size_ok"] = r.sample_size_ok;
  return j;
}

}  // namespace illposed
