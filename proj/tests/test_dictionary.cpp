#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "illposed/dictionary.hpp"

using namespace illposed;

namespace {
// Eq-style direct sum Σ C(n,k)(-1)^k x^k / k!, the independent oracle for
// the recurrence.
double laguerre_direct(int n, double x) {
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    double binom = 1.0;
    for (int i = 0; i < k; ++i) binom *= static_cast<double>(n - i) / (i + 1);
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    sum += binom * ((k % 2) ? -1.0 : 1.0) * std::pow(x, k) / fact;
  }
  return sum;
}
}  // namespace

TEST_CASE("laguerre polynomial closed-form values") {
  for (double x : {-1.0, 0.0, 0.3, 2.0, 11.0}) REQUIRE(laguerre_polynomial(0, x) == 1.0);
  REQUIRE(laguerre_polynomial(1, 2.0) == Catch::Approx(-1.0));
  REQUIRE(laguerre_polynomial(2, 1.0) == Catch::Approx(-0.5));
  REQUIRE_THROWS_AS(laguerre_polynomial(61, 1.0), std::invalid_argument);
}

TEST_CASE("laguerre recurrence agrees with the direct sum") {
  for (int deg = 0; deg <= 10; ++deg)
    for (double x : {0.1, 1.0, 5.0})
      REQUIRE(std::abs(laguerre_polynomial(deg, x) - laguerre_direct(deg, x)) <= 1e-9);
}

TEST_CASE("laguerre function values") {
  REQUIRE(laguerre_function(0, 2.5, 0.0) == 1.0);
  REQUIRE(laguerre_function(0, 1.0, 2.0) == Catch::Approx(std::exp(-1.0)));
  REQUIRE(laguerre_function(1, 2.0, 1.0) == Catch::Approx(-std::exp(-1.0)));
  REQUIRE_THROWS_AS(laguerre_function(0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("laguerre dictionary has the Table-1 size and unit columns") {
  const Grid g = Grid::uniform(4.0, 32);
  std::vector<int> degrees = {0, 1, 2, 3};
  std::vector<double> scales;
  for (int k = 1; k <= 16; ++k) scales.push_back(k / 4.0);
  const Dictionary dict = build_laguerre_dictionary(g, degrees, scales);
  REQUIRE(dict.p() == 64);
  REQUIRE(dict.normalized);
  for (int j = 0; j < dict.p(); ++j)
    REQUIRE(std::abs(dict.Phi.col(j).norm() - 1.0) <= 1e-12);

  // scale-major order: column s·|degrees| + d carries (degrees[d], scales[s])
  Vector expected(g.n);
  for (int i = 0; i < g.n; ++i) expected[i] = laguerre_function(2, scales[3], g.points[i]);
  expected /= expected.norm();
  REQUIRE((dict.Phi.col(3 * 4 + 2) - expected).norm() <= 1e-14);
}

TEST_CASE("single laguerre atom is the scaled exponential") {
  const Grid g = Grid::uniform(4.0, 16);
  const Dictionary dict = build_laguerre_dictionary(g, {0}, {1.0});
  REQUIRE(dict.p() == 1);
  Vector e(g.n);
  for (int i = 0; i < g.n; ++i) e[i] = std::exp(-0.5 * g.points[i]);
  e /= e.norm();
  REQUIRE((dict.Phi.col(0) - e).norm() <= 1e-14);
}

TEST_CASE("duplicate (degree, scale) pairs are rejected") {
  const Grid g = Grid::uniform(4.0, 16);
  REQUIRE_THROWS_AS(build_laguerre_dictionary(g, {0, 0}, {1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_laguerre_dictionary(g, {0, 1}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("laguerre functions are near-orthogonal under the b-weighted measure") {
  // ∫₀^∞ φ_{n,b} φ_{m,b} b dx = δ_{nm}; Riemann sum at T=40, n=4096, b=1.
  const Grid g = Grid::uniform(40.0, 4096);
  Matrix L(g.n, 4);
  for (int d = 0; d < 4; ++d)
    for (int i = 0; i < g.n; ++i) L(i, d) = laguerre_function(d, 1.0, g.points[i]);
  const Matrix gram = g.spacing() * 1.0 * (L.transpose() * L);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      REQUIRE(std::abs(gram(a, b) - (a == b ? 1.0 : 0.0)) <= 1e-2);
}

TEST_CASE("random dictionary determinism and column normalization") {
  const Dictionary c1 = build_random_dictionary(RandomDictionaryKind::GaussianCols, 24, 40, 11);
  const Dictionary c2 = build_random_dictionary(RandomDictionaryKind::GaussianCols, 24, 40, 11);
  REQUIRE((c1.Phi - c2.Phi).norm() == 0.0);
  for (int j = 0; j < c1.p(); ++j) REQUIRE(c1.Phi.col(j).norm() == Catch::Approx(1.0).margin(1e-15));

  const Dictionary r1 = build_random_dictionary(RandomDictionaryKind::GaussianRows, 24, 40, 11);
  const Dictionary r2 = build_random_dictionary(RandomDictionaryKind::GaussianRows, 24, 40, 12);
  REQUIRE((r1.Phi - r2.Phi).norm() > 0.0);
  REQUIRE_THROWS_AS(build_random_dictionary(RandomDictionaryKind::GaussianRows, 0, 4, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(random_kind_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("gaussian-rows gram diagonal concentrates near one") {
  const int n = 200, p = 50;
  int inside = 0, total = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Dictionary d = build_random_dictionary(RandomDictionaryKind::GaussianRows, n, p, seed);
    for (int j = 0; j < p; ++j) {
      const double g = d.Phi.col(j).squaredNorm();
      if (g >= 0.7 && g <= 1.3) ++inside;
      ++total;
    }
  }
  REQUIRE(static_cast<double>(inside) / total >= 0.99);
}

TEST_CASE("rademacher rows have unit-magnitude scaled entries") {
  const Dictionary d = build_random_dictionary(RandomDictionaryKind::RademacherRows, 16, 8, 3);
  const double s = 1.0 / std::sqrt(16.0);
  for (int j = 0; j < d.p(); ++j)
    for (int i = 0; i < d.n(); ++i) REQUIRE(std::abs(std::abs(d.Phi(i, j)) - s) <= 1e-15);
}

TEST_CASE("tight frame identity is exact") {
  SECTION("square case is orthogonal") {
    const TightFrame f = build_tight_frame(16, 16, 1.0);
    REQUIRE((f.D * f.D.transpose() - Matrix::Identity(16, 16)).norm() <= 1e-12);
  }
  SECTION("rectangular scaled case") {
    const TightFrame f = build_tight_frame(32, 64, 2.0);
    const Matrix E = f.D * f.D.transpose() - 4.0 * Matrix::Identity(32, 32);
    REQUIRE(E.norm() <= 1e-10 * 4.0);
    GaussianSampler gauss(5, 0);
    for (int t = 0; t < 100; ++t) {
      Vector x(32);
      for (int i = 0; i < 32; ++i) x[i] = gauss();
      const double lhs = (f.D.transpose() * x).squaredNorm();
      REQUIRE(std::abs(lhs - 4.0 * x.squaredNorm()) <= 1e-10 * x.squaredNorm());
    }
  }
  REQUIRE_THROWS_AS(build_tight_frame(16, 8, 1.0), std::invalid_argument);
}

TEST_CASE("structured dictionary matches its defining formula") {
  const TightFrame frame = build_tight_frame(16, 32, 1.5);
  const Dictionary d = build_structured_dictionary(frame, 20, 77);
  const Dictionary d2 = build_structured_dictionary(frame, 20, 77);
  REQUIRE((d.Phi - d2.Phi).norm() == 0.0);

  // regenerate W from the same stream; Φ must equal (k√n)^{-1} D W, so a zero
  // column of W maps to a zero column of Φ
  Matrix W(32, 20);
  GaussianSampler gauss(77, 0);
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 32; ++i) W(i, j) = gauss();
  const Matrix expected = (1.0 / (1.5 * 4.0)) * (frame.D * W);
  REQUIRE((d.Phi - expected).norm() <= 1e-14);
}

TEST_CASE("structured dictionary entries have variance 1/n") {
  const int n = 25, p = 400;  // 10⁴ entries
  const TightFrame frame = build_tight_frame(n, 50, 2.0);
  const Dictionary d = build_structured_dictionary(frame, p, 13);
  const double mean = d.Phi.mean();
  const double var = (d.Phi.array() - mean).square().sum() / (n * p - 1);
  REQUIRE(var == Catch::Approx(1.0 / n).epsilon(0.05));
}

TEST_CASE("dictionary csv round trip") {
  const Grid g = Grid::uniform(4.0, 8);
  const Dictionary dict = build_laguerre_dictionary(g, {0, 1}, {0.5, 1.0});
  const std::string path = "test_dictionary_roundtrip.csv";
  csv::write_file(path, dictionary_to_csv(dict));
  const Dictionary loaded = dictionary_from_csv(path);
  REQUIRE(loaded.n() == dict.n());
  REQUIRE(loaded.p() == dict.p());
  REQUIRE((loaded.Phi - dict.Phi).norm() == 0.0);
  std::remove(path.c_str());
}
