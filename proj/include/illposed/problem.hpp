#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "illposed/csv.hpp"
#include "illposed/rng.hpp"

namespace illposed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform grid x_i = (i+1)·T/n, i = 0..n-1. Excludes 0 (where a causal
/// convolution vanishes identically) and includes the endpoint T.
struct Grid {
  double T = 0.0;
  int n = 0;
  Vector points;

  static Grid uniform(double T, int n) {
    if (T <= 0.0) throw std::invalid_argument("Grid: T must be positive");
    if (n <= 0) throw std::invalid_argument("Grid: n must be positive");
    Grid g;
    g.T = T;
    g.n = n;
    g.points.resize(n);
    for (int i = 0; i < n; ++i) g.points[i] = (i + 1) * T / n;
    return g;
  }

  double spacing() const { return T / n; }
};

enum class TestFunction { F1, F2, F3 };

inline TestFunction test_function_from_string(const std::string& id) {
  if (id == "f1") return TestFunction::F1;
  if (id == "f2") return TestFunction::F2;
  if (id == "f3") return TestFunction::F3;
  throw std::invalid_argument("unknown test function '" + id + "' (expected f1|f2|f3)");
}

inline std::string to_string(TestFunction id) {
  switch (id) {
    case TestFunction::F1: return "f1";
    case TestFunction::F2: return "f2";
    default: return "f3";
  }
}

inline double test_function_value(TestFunction id, double x) {
  switch (id) {
    case TestFunction::F1: return x * x * std::exp(-3.0 * x);
    case TestFunction::F2: return x * x * x * x * std::exp(-4.0 * x);
    default: return std::exp(-0.5 * x);
  }
}

inline Vector evaluate_test_function(TestFunction id, const Grid& grid) {
  Vector f(grid.n);
  for (int i = 0; i < grid.n; ++i) f[i] = test_function_value(id, grid.points[i]);
  return f;
}

/// Discretizes q(x_i) = ∫₀^{x_i} g(x_i - t) f(t) dt by the composite
/// trapezoidal rule on {0, x_0, ..., x_i}. The grid carries no sample of f
/// at t = 0, so that node borrows the value at the first grid point; the
/// resulting matrix is lower triangular with Q_ii = Δ·g(0)/2.
template <class Kernel>
Matrix build_convolution_operator(Kernel&& g, const Grid& grid) {
  const int n = grid.n;
  const double dx = grid.spacing();
  Matrix Q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double xi = grid.points[i];
    // t = 0 cell, attributed to f(x_0)
    Q(i, 0) += 0.5 * dx * g(xi);
    for (int j = 0; j <= i; ++j) {
      const double w = (j == i) ? 0.5 * dx : dx;
      Q(i, j) += w * g(xi - grid.points[j]);
    }
  }
  return Q;
}

struct InverseProblem {
  Grid grid;
  Matrix Q;
  std::optional<Vector> f_true;
  Vector y;
  double sigma = 0.0;

  /// Per-sample noise standard deviation σ·√(T/n).
  double noise_scale() const { return sigma * std::sqrt(grid.T / grid.n); }
};

/// σ with RMS(q)/σ = snr, i.e. σ = ‖q‖₂/(snr·√n). The noise multiplier σ is
/// calibrated against the signal scale; the per-sample noise std then picks
/// up the generator's √(T/n) factor. Calibrating against the per-sample std
/// instead puts every benchmark cell far outside the reference table.
inline double sigma_from_snr(const Vector& q, double snr) {
  if (snr <= 0.0) throw std::invalid_argument("sigma_from_snr: snr must be positive");
  const double qnorm = q.norm();
  if (qnorm == 0.0) throw std::invalid_argument("sigma_from_snr: q is identically zero");
  return qnorm / (snr * std::sqrt(static_cast<double>(q.size())));
}

/// y = Qf + σ·√(T/n)·ξ with ξ i.i.d. standard normal from the seeded stream.
inline Vector synthesize_observations(const Matrix& Q, const Vector& f, double sigma,
                                      const Grid& grid, std::uint64_t seed) {
  if (Q.rows() != grid.n || Q.cols() != f.size())
    throw std::invalid_argument("synthesize_observations: dimension mismatch");
  Vector y = Q * f;
  if (sigma != 0.0) {
    GaussianSampler gauss(seed, 0);
    const double scale = sigma * std::sqrt(grid.T / grid.n);
    for (int i = 0; i < grid.n; ++i) y[i] += scale * gauss();
  }
  return y;
}

inline std::string problem_to_csv(const InverseProblem& pb) {
  std::ostringstream out;
  out << "x,f_true,q,y\n";
  const Vector q = pb.f_true ? Vector(pb.Q * *pb.f_true) : Vector(Vector::Zero(pb.grid.n));
  for (int i = 0; i < pb.grid.n; ++i) {
    out << csv::format_double(pb.grid.points[i]) << ','
        << (pb.f_true ? csv::format_double((*pb.f_true)[i]) : std::string()) << ','
        << (pb.f_true ? csv::format_double(q[i]) : std::string()) << ','
        << csv::format_double(pb.y[i]) << '\n';
  }
  return out.str();
}

/// Reads (x, y [, f_true]) back from a problem CSV. The operator is not
/// stored in the file; rebuild it from the kernel and the recovered grid.
struct LoadedObservations {
  Grid grid;
  Vector y;
  std::optional<Vector> f_true;
};

inline LoadedObservations observations_from_csv(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const auto x = t.numeric_column("x");
  const auto y = t.numeric_column("y");
  if (x.empty()) throw io_error("problem csv '" + path + "' is empty");
  LoadedObservations out;
  const int n = static_cast<int>(x.size());
  out.grid = Grid::uniform(x.back(), n);
  out.y = Eigen::Map<const Vector>(y.data(), n);
  const int jf = t.column("f_true");
  if (jf >= 0 && !t.rows.empty() && !t.rows.front()[jf].empty()) {
    const auto f = t.numeric_column("f_true");
    out.f_true = Eigen::Map<const Vector>(f.data(), n);
  }
  return out;
}

}  // namespace illposed
