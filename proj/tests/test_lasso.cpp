#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "illposed/lasso.hpp"
#include "illposed/precondition.hpp"

using namespace illposed;

namespace {

// Independent oracle: global minimum of F(t) = tᵀGt - 2tᵀb + αΣν|t| by
// enumerating every support and sign pattern and solving the stationarity
// system in closed form. Exponential in p; test-only.
struct OracleResult {
  Vector theta;
  double objective = 0.0;
};

OracleResult exhaustive_weighted_lasso(const Matrix& G, const Vector& b, const Vector& nu,
                                       double alpha) {
  const int p = static_cast<int>(b.size());
  OracleResult best;
  best.theta = Vector::Zero(p);
  best.objective = 0.0;  // F(0)
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    std::vector<int> S;
    for (int j = 0; j < p; ++j)
      if (mask & (1u << j)) S.push_back(j);
    const int m = static_cast<int>(S.size());
    Matrix Gs(m, m);
    Vector bs(m), ns(m);
    for (int a = 0; a < m; ++a) {
      bs[a] = b[S[a]];
      ns[a] = nu[S[a]];
      for (int c = 0; c < m; ++c) Gs(a, c) = G(S[a], S[c]);
    }
    Eigen::LLT<Matrix> llt(Gs);
    if (llt.info() != Eigen::Success) continue;
    for (unsigned signs = 0; signs < (1u << m); ++signs) {
      Vector rhs(m);
      for (int a = 0; a < m; ++a) {
        const double s = (signs & (1u << a)) ? -1.0 : 1.0;
        rhs[a] = bs[a] - 0.5 * alpha * ns[a] * s;
      }
      const Vector ts = llt.solve(rhs);
      bool consistent = true;
      for (int a = 0; a < m; ++a) {
        const double s = (signs & (1u << a)) ? -1.0 : 1.0;
        if (s * ts[a] <= 0.0) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;
      const double F = ts.dot(Gs * ts) - 2.0 * ts.dot(bs) +
                       alpha * (ns.array() * ts.array().abs()).sum();
      if (F < best.objective) {
        best.objective = F;
        best.theta = Vector::Zero(p);
        for (int a = 0; a < m; ++a) best.theta[S[a]] = ts[a];
      }
    }
  }
  return best;
}

Matrix random_psd(int p, std::uint64_t seed, int extra_rows = 5) {
  GaussianSampler gauss(seed, 0);
  Matrix A(p + extra_rows, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p + extra_rows; ++i) A(i, j) = gauss();
  return A.transpose() * A / (p + extra_rows);
}

struct TableOneSystem {
  Matrix G;
  Vector b, nu;
};

TableOneSystem table_one_system(int n, std::uint64_t seed) {
  const Grid g = Grid::uniform(4.0, n);
  const Matrix Q = build_convolution_operator([](double x) { return std::exp(-x); }, g);
  std::vector<double> scales;
  for (int k = 1; k <= 16; ++k) scales.push_back(k / 4.0);
  const Dictionary dict = build_laguerre_dictionary(g, {0, 1, 2, 3}, scales);
  const Vector f = evaluate_test_function(TestFunction::F1, g);
  const double sigma = sigma_from_snr(Q * f, 3.0, g.T);
  InverseProblem pb{g, Q, f, synthesize_observations(Q, f, sigma, g, seed), sigma};
  const auto sys = precondition(pb, dict);
  return {sys.G, sys.b, sys.nu};
}

}  // namespace

TEST_CASE("alpha_max is the smallest all-zero penalty") {
  Vector nu = Vector::Ones(4);
  REQUIRE(alpha_max(Vector::Zero(4), nu) == 0.0);

  Vector b(4);
  b << 1.0, 0.0, 0.2, -0.3;
  Vector w(4);
  w << 2.0, 1.0, 1.0, 1.0;
  REQUIRE(alpha_max(b, w) == Catch::Approx(1.0));

  const Matrix G = random_psd(4, 1);
  const double am = alpha_max(b, w);
  const LassoFit at = weighted_lasso(G, b, w, am, Vector());
  REQUIRE(at.support.empty());
  const LassoFit below = weighted_lasso(G, b, w, 0.99 * am, Vector());
  REQUIRE_FALSE(below.support.empty());
}

TEST_CASE("orthonormal design has the soft-threshold solution") {
  const int p = 6;
  const Matrix I = Matrix::Identity(p, p);
  Vector b(p);
  b << 0.9, -0.4, 0.05, 0.0, -1.3, 0.6;
  const Vector nu = Vector::Ones(p);

  SECTION("alpha = 0 returns b") {
    const LassoFit fit = weighted_lasso(I, b, nu, 0.0, Vector());
    REQUIRE((fit.theta - b).lpNorm<Eigen::Infinity>() <= 1e-12);
    REQUIRE(fit.converged);
  }
  SECTION("componentwise soft threshold at alpha > 0") {
    const double alpha = 0.5;
    const LassoFit fit = weighted_lasso(I, b, nu, alpha, Vector());
    for (int j = 0; j < p; ++j)
      REQUIRE(fit.theta[j] == Catch::Approx(soft_threshold(b[j], alpha / 2)).margin(1e-12));
  }
}

TEST_CASE("solver matches the exhaustive oracle on small instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int p = 8;
    const Matrix G = random_psd(p, seed);
    GaussianSampler gauss(seed + 1000, 0);
    Vector b(p), nu(p);
    for (int j = 0; j < p; ++j) {
      b[j] = gauss();
      nu[j] = 0.5 + gauss.uniform();
    }
    const double alpha = 0.35 * alpha_max(b, nu);
    LassoOptions opts;
    opts.tol = 1e-12;
    const LassoFit fit = weighted_lasso(G, b, nu, alpha, Vector(), opts);
    REQUIRE(fit.converged);
    const OracleResult oracle = exhaustive_weighted_lasso(G, b, nu, alpha);
    const double F = lasso_objective(fit.theta, G, b, nu, alpha);
    REQUIRE(std::abs(F - oracle.objective) <= 1e-8 * std::max(1.0, std::abs(oracle.objective)));
  }
}

TEST_CASE("solution is locally optimal under random perturbations") {
  const int p = 12;
  const Matrix G = random_psd(p, 3);
  GaussianSampler gauss(77, 0);
  Vector b(p), nu(p);
  for (int j = 0; j < p; ++j) {
    b[j] = gauss();
    nu[j] = 0.5 + gauss.uniform();
  }
  const double alpha = 0.3 * alpha_max(b, nu);
  LassoOptions opts;
  opts.tol = 1e-12;
  const LassoFit fit = weighted_lasso(G, b, nu, alpha, Vector(), opts);
  const double F = lasso_objective(fit.theta, G, b, nu, alpha);
  for (int t = 0; t < 100000; ++t) {
    Vector d(p);
    for (int j = 0; j < p; ++j) d[j] = gauss();
    const Vector cand = fit.theta + gauss.uniform() * 0.1 * d;
    REQUIRE(F <= lasso_objective(cand, G, b, nu, alpha) + 1e-6);
  }
}

TEST_CASE("kkt residual endpoints") {
  const int p = 5;
  const Matrix I = Matrix::Identity(p, p);
  Vector b(p);
  b << 1.0, -0.8, 0.3, 0.0, 0.05;
  const Vector nu = Vector::Ones(p);
  const double alpha = 0.4;
  Vector exact(p);
  for (int j = 0; j < p; ++j) exact[j] = soft_threshold(b[j], alpha / 2);
  REQUIRE(kkt_residual(exact, I, b, nu, alpha) <= 1e-12);

  Vector perturbed = exact;
  perturbed[0] += 1e-3;  // support coordinate; response is 2·(Gθ-b) linear
  REQUIRE(kkt_residual(perturbed, I, b, nu, alpha) == Catch::Approx(2e-3).epsilon(1e-6));

  REQUIRE(kkt_residual(Vector::Zero(p), I, b, nu, alpha_max(b, nu)) == 0.0);
}

TEST_CASE("path starts empty and warm starts do not hurt") {
  const auto sys = table_one_system(32, 5);
  LassoOptions opts;
  opts.tol = 1e-9;
  const LassoPath path = lasso_path(sys.G, sys.b, sys.nu, 60, opts);
  REQUIRE(path.alphas[0] == Catch::Approx(path.alpha_max));
  REQUIRE(path.fits.front().support.empty());
  for (std::size_t k = 1; k < path.fits.size(); ++k) {
    REQUIRE(path.alphas[k] < path.alphas[k - 1]);
    const double a = path.alphas[k];
    const double mine = lasso_objective(path.fits[k].theta, sys.G, sys.b, sys.nu, a);
    const double prev = lasso_objective(path.fits[k - 1].theta, sys.G, sys.b, sys.nu, a);
    REQUIRE(mine <= prev + 1e-10);
  }
}

TEST_CASE("full path on the Table-1 configuration is fast") {
  const auto sys = table_one_system(32, 11);
  const auto t0 = std::chrono::steady_clock::now();
  LassoOptions opts;
  opts.tol = 1e-8;
  const LassoPath path = lasso_path(sys.G, sys.b, sys.nu, 200, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(path.fits.size() == 200);
  REQUIRE(secs < 5.0);
}

TEST_CASE("degenerate inputs are rejected") {
  const Matrix G = Matrix::Zero(2, 2);
  REQUIRE_THROWS_AS(weighted_lasso(G, Vector::Ones(2), Vector::Ones(2), 0.1, Vector()),
                    degenerate_atom_error);
  REQUIRE_THROWS_AS(lasso_path(Matrix::Identity(2, 2), Vector::Zero(2), Vector::Ones(2), 10),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(lasso_path(Matrix::Identity(2, 2), Vector::Ones(2), Vector::Ones(2), 1),
                    std::invalid_argument);
}

TEST_CASE("cardinality-restricted fit") {
  const auto sys = table_one_system(32, 7);
  const LassoPath path = lasso_path(sys.G, sys.b, sys.nu, 100);

  SECTION("s = 0 returns the empty fit at alpha_max") {
    const auto r = cardinality_restricted_fit(path, 0);
    REQUIRE(r.fit.support.empty());
    REQUIRE(r.fit.alpha == Catch::Approx(path.alpha_max));
    REQUIRE_FALSE(r.fallback);
  }
  SECTION("s >= p returns the smallest-alpha fit") {
    const auto r = cardinality_restricted_fit(path, static_cast<int>(sys.b.size()));
    REQUIRE(r.fit.alpha == Catch::Approx(path.alphas[path.alphas.size() - 1]));
  }
  SECTION("negative s is rejected") {
    REQUIRE_THROWS_AS(cardinality_restricted_fit(path, -1), std::invalid_argument);
  }
}

TEST_CASE("restricted fit is near the exhaustive support oracle") {
  const int p = 10, s = 2;
  const Matrix G = random_psd(p, 21);
  GaussianSampler gauss(22, 0);
  Vector b(p), nu(p);
  for (int j = 0; j < p; ++j) {
    b[j] = 1.0 + gauss.uniform();  // dense b
    nu[j] = 0.5 + gauss.uniform();
  }
  LassoOptions opts;
  opts.tol = 1e-11;
  const LassoPath path = lasso_path(G, b, nu, 200, opts);
  const auto r = cardinality_restricted_fit(path, s);
  REQUIRE(static_cast<int>(r.fit.support.size()) <= s);
  const double mine = lasso_objective(r.fit.theta, G, b, nu, r.fit.alpha);

  // oracle: best objective at the same alpha over every support of size <= s
  double oracle = 0.0;  // empty support
  for (int j1 = 0; j1 < p; ++j1)
    for (int j2 = j1; j2 < p; ++j2) {
      std::vector<int> S = (j1 == j2) ? std::vector<int>{j1} : std::vector<int>{j1, j2};
      const int m = static_cast<int>(S.size());
      Matrix Gs(m, m);
      Vector bs(m), ns(m);
      for (int a = 0; a < m; ++a) {
        bs[a] = b[S[a]];
        ns[a] = nu[S[a]];
        for (int c = 0; c < m; ++c) Gs(a, c) = G(S[a], S[c]);
      }
      // restricted problem is a tiny weighted lasso; solve it exactly
      LassoOptions ropts;
      ropts.tol = 1e-13;
      const LassoFit sub = weighted_lasso(Gs, bs, ns, r.fit.alpha, Vector(), ropts);
      oracle = std::min(oracle, lasso_objective(sub.theta, Gs, bs, ns, r.fit.alpha));
    }
  REQUIRE(mine <= oracle + 0.05 * std::abs(oracle));
}

TEST_CASE("converged fits satisfy the advertised kkt bound") {
  for (std::uint64_t seed = 40; seed < 44; ++seed) {
    const auto sys = table_one_system(32, seed);
    LassoOptions opts;
    opts.tol = 1e-9;
    const double a = 0.2 * alpha_max(sys.b, sys.nu);
    const LassoFit fit = weighted_lasso(sys.G, sys.b, sys.nu, a, Vector(), opts);
    if (fit.converged)
      REQUIRE(fit.kkt_residual <= opts.tol * std::max(1.0, sys.b.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("coordinate sweeps never increase the objective") {
  const int p = 16;
  const Matrix G = random_psd(p, 9);
  GaussianSampler gauss(10, 0);
  Vector b(p), nu(p);
  for (int j = 0; j < p; ++j) {
    b[j] = gauss();
    nu[j] = 0.5 + gauss.uniform();
  }
  const double alpha = 0.25 * alpha_max(b, nu);
  double prev = lasso_objective(Vector::Zero(p), G, b, nu, alpha);
  for (int k = 1; k <= 25; ++k) {
    LassoOptions opts;
    opts.tol = 0.0;  // run exactly k sweeps
    opts.max_iter = k;
    const LassoFit fit = weighted_lasso(G, b, nu, alpha, Vector::Zero(p), opts);
    const double F = lasso_objective(fit.theta, G, b, nu, alpha);
    REQUIRE(F <= prev + 1e-12);
    prev = F;
  }
}

TEST_CASE("common rescaling of (G, b, alpha) leaves the solution unchanged") {
  const int p = 10;
  const Matrix G = random_psd(p, 31);
  GaussianSampler gauss(32, 0);
  Vector b(p), nu(p);
  for (int j = 0; j < p; ++j) {
    b[j] = gauss();
    nu[j] = 0.5 + gauss.uniform();
  }
  const double alpha = 0.3 * alpha_max(b, nu);
  LassoOptions opts;
  opts.tol = 1e-12;
  const LassoFit base = weighted_lasso(G, b, nu, alpha, Vector(), opts);
  const double c2 = 7.3;
  const LassoFit scaled = weighted_lasso(c2 * G, c2 * b, nu, c2 * alpha, Vector(), opts);
  REQUIRE((base.theta - scaled.theta).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("empirical slow-rate bound holds with the advertised frequency") {
  const Grid g = Grid::uniform(4.0, 32);
  const Matrix Q = build_convolution_operator([](double x) { return std::exp(-x); }, g);
  std::vector<double> scales;
  for (int k = 1; k <= 16; ++k) scales.push_back(k / 4.0);
  const Dictionary dict = build_laguerre_dictionary(g, {0, 1, 2, 3}, scales);
  const Vector f = evaluate_test_function(TestFunction::F1, g);
  const Vector q = Q * f;
  const double sigma = sigma_from_snr(q, 3.0, g.T);
  const double tau = 1.0;
  const double a0 = alpha0(sigma, g, dict.p(), tau);
  const Matrix Psi = compute_inverse_images(Q, dict);
  const Vector nu = compute_weights(Psi);
  const Matrix G = dict.Phi.transpose() * dict.Phi;

  // fixed reference expansion: the noiseless fit at α₀
  LassoOptions opts;
  opts.tol = 1e-10;
  const Vector b_clean = Psi.transpose() * q;
  const LassoFit ref = weighted_lasso(G, b_clean, nu, a0, Vector(), opts);
  const double ref_bias = (dict.Phi * ref.theta - f).squaredNorm() / g.n;
  const double ref_pen = 4.0 * a0 * (nu.array() * ref.theta.array().abs()).sum();

  int hold = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    const Vector y = synthesize_observations(Q, f, sigma, g, derive_seed(900, r));
    const Vector b = Psi.transpose() * y;
    const LassoFit fit = weighted_lasso(G, b, nu, a0, Vector(), opts);
    const double lhs = (dict.Phi * fit.theta - f).squaredNorm() / g.n;
    if (lhs <= ref_bias + ref_pen) ++hold;
  }
  const double freq = static_cast<double>(hold) / runs;
  REQUIRE(freq >= 1.0 - 2.0 * std::pow(64.0, -tau) - 0.05);
}
