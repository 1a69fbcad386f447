#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "illposed/csv.hpp"
#include "illposed/errors.hpp"
#include "illposed/laguerre.hpp"
#include "illposed/problem.hpp"
#include "illposed/rng.hpp"

namespace illposed {

struct LaguerreProvenance {
  std::vector<int> degrees;
  std::vector<double> scales;
};
struct SubGaussRowsProvenance {
  std::uint64_t seed = 0;
  bool rademacher = false;
};
struct SubGaussColsProvenance {
  std::uint64_t seed = 0;
};
struct TightFrameProvenance {
  double k = 1.0;
  int m = 0;
  std::uint64_t seed = 0;
};
struct ExternalProvenance {
  std::string source;
};

using Provenance = std::variant<LaguerreProvenance, SubGaussRowsProvenance,
                                SubGaussColsProvenance, TightFrameProvenance,
                                ExternalProvenance>;

/// An n×p column dictionary together with how it was generated.
struct Dictionary {
  Matrix Phi;
  Provenance provenance = ExternalProvenance{};
  bool normalized = false;

  int n() const { return static_cast<int>(Phi.rows()); }
  int p() const { return static_cast<int>(Phi.cols()); }
};

/// D with DDᵀ = k²·I_n, built from the first n rows of the m×m orthogonal
/// DCT-II matrix scaled by k.
struct TightFrame {
  Matrix D;
  double k = 1.0;
  int m() const { return static_cast<int>(D.cols()); }
};

/// Columns are φ_{degree,scale} on the grid, unit ℓ₂ norm, ordered
/// scale-major: column index = scale_index·|degrees| + degree_index.
inline Dictionary build_laguerre_dictionary(const Grid& grid, const std::vector<int>& degrees,
                                            const std::vector<double>& scales) {
  if (degrees.empty() || scales.empty())
    throw std::invalid_argument("laguerre dictionary: degrees and scales must be nonempty");
  for (double b : scales)
    if (b <= 0.0) throw std::invalid_argument("laguerre dictionary: scales must be positive");
  std::set<std::pair<int, double>> seen;
  for (double b : scales)
    for (int d : degrees)
      if (!seen.insert({d, b}).second)
        throw std::invalid_argument("laguerre dictionary: duplicate (degree, scale) pair");

  const int n = grid.n;
  const int p = static_cast<int>(degrees.size() * scales.size());
  Dictionary dict;
  dict.Phi.resize(n, p);
  int col = 0;
  for (double b : scales) {
    for (int d : degrees) {
      for (int i = 0; i < n; ++i) dict.Phi(i, col) = laguerre_function(d, b, grid.points[i]);
      const double norm = dict.Phi.col(col).norm();
      if (norm == 0.0) throw degenerate_weight_error("laguerre dictionary: zero column");
      dict.Phi.col(col) /= norm;
      ++col;
    }
  }
  dict.provenance = LaguerreProvenance{degrees, scales};
  dict.normalized = true;
  return dict;
}

enum class RandomDictionaryKind { GaussianRows, GaussianCols, RademacherRows };

inline RandomDictionaryKind random_kind_from_string(const std::string& s) {
  if (s == "rows") return RandomDictionaryKind::GaussianRows;
  if (s == "cols") return RandomDictionaryKind::GaussianCols;
  if (s == "rademacher") return RandomDictionaryKind::RademacherRows;
  throw std::invalid_argument("unknown random dictionary kind '" + s +
                              "' (expected rows|cols|rademacher)");
}

/// rows:       i.i.d. N(0,1) entries scaled by n^{-1/2}, so that sparse
///             restricted eigenvalues of ΦᵀΦ concentrate near 1.
/// cols:       i.i.d. N(0,1) columns rescaled to exact unit norm.
/// rademacher: ±1 entries scaled by n^{-1/2} (sub-gaussian rows variant).
inline Dictionary build_random_dictionary(RandomDictionaryKind kind, int n, int p,
                                          std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("random dictionary: n, p must be >= 1");
  Dictionary dict;
  dict.Phi.resize(n, p);
  GaussianSampler gauss(seed, 0);
  switch (kind) {
    case RandomDictionaryKind::GaussianRows: {
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) dict.Phi(i, j) = scale * gauss();
      dict.provenance = SubGaussRowsProvenance{seed, false};
      dict.normalized = false;
      break;
    }
    case RandomDictionaryKind::RademacherRows: {
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) dict.Phi(i, j) = scale * gauss.rademacher();
      dict.provenance = SubGaussRowsProvenance{seed, true};
      dict.normalized = false;
      break;
    }
    case RandomDictionaryKind::GaussianCols: {
      for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) dict.Phi(i, j) = gauss();
        const double norm = dict.Phi.col(j).norm();
        if (norm == 0.0) throw degenerate_weight_error("random dictionary: zero column");
        dict.Phi.col(j) /= norm;
      }
      dict.provenance = SubGaussColsProvenance{seed};
      dict.normalized = true;
      break;
    }
  }
  return dict;
}

inline TightFrame build_tight_frame(int n, int m, double k) {
  if (n < 1 || m < n) throw std::invalid_argument("tight frame: need m >= n >= 1");
  if (k <= 0.0) throw std::invalid_argument("tight frame: k must be positive");
  TightFrame frame;
  frame.k = k;
  frame.D.resize(n, m);
  const double pi = 3.14159265358979323846;
  for (int r = 0; r < n; ++r) {
    const double c = k * ((r == 0) ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m));
    for (int j = 0; j < m; ++j) frame.D(r, j) = c * std::cos(pi * (j + 0.5) * r / m);
  }
  return frame;
}

/// Φ = (k√n)^{-1} D W with W m×p i.i.d. standard normal. Entries come out
/// i.i.d. N(0, 1/n), matching the scaling of the sub-gaussian-rows family.
inline Dictionary build_structured_dictionary(const TightFrame& frame, int p,
                                              std::uint64_t seed) {
  if (p < 1) throw std::invalid_argument("structured dictionary: p must be >= 1");
  const int n = static_cast<int>(frame.D.rows());
  const int m = frame.m();
  Matrix W(m, p);
  GaussianSampler gauss(seed, 0);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < m; ++i) W(i, j) = gauss();
  Dictionary dict;
  dict.Phi = (1.0 / (frame.k * std::sqrt(static_cast<double>(n)))) * (frame.D * W);
  dict.provenance = TightFrameProvenance{frame.k, m, seed};
  dict.normalized = false;
  return dict;
}

inline std::vector<std::string> column_labels(const Dictionary& dict) {
  std::vector<std::string> labels;
  labels.reserve(dict.p());
  if (const auto* lag = std::get_if<LaguerreProvenance>(&dict.provenance)) {
    for (double b : lag->scales)
      for (int d : lag->degrees) {
        std::ostringstream s;
        s << "lag_d" << d << "_b" << b;
        labels.push_back(s.str());
      }
  } else {
    for (int j = 0; j < dict.p(); ++j) labels.push_back("atom" + std::to_string(j));
  }
  return labels;
}

inline std::string provenance_tag(const Dictionary& dict) {
  if (std::holds_alternative<LaguerreProvenance>(dict.provenance)) return "laguerre";
  if (const auto* r = std::get_if<SubGaussRowsProvenance>(&dict.provenance))
    return r->rademacher ? "rademacher" : "rows";
  if (std::holds_alternative<SubGaussColsProvenance>(dict.provenance)) return "cols";
  if (std::holds_alternative<TightFrameProvenance>(dict.provenance)) return "structured";
  return "external";
}

inline std::string dictionary_to_csv(const Dictionary& dict) {
  std::ostringstream out;
  out << "# kind=" << provenance_tag(dict) << " n=" << dict.n() << " p=" << dict.p()
      << " normalized=" << (dict.normalized ? 1 : 0) << '\n';
  const auto labels = column_labels(dict);
  for (int j = 0; j < dict.p(); ++j) out << (j ? "," : "") << labels[j];
  out << '\n';
  for (int i = 0; i < dict.n(); ++i) {
    for (int j = 0; j < dict.p(); ++j)
      out << (j ? "," : "") << csv::format_double(dict.Phi(i, j));
    out << '\n';
  }
  return out.str();
}

inline Dictionary dictionary_from_csv(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const int p = static_cast<int>(t.header.size());
  const int n = static_cast<int>(t.rows.size());
  if (n == 0 || p == 0) throw io_error("dictionary csv '" + path + "' is empty");
  Dictionary dict;
  dict.Phi.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) dict.Phi(i, j) = std::stod(t.rows[i].at(j));
  dict.provenance = ExternalProvenance{path};
  return dict;
}

}  // namespace illposed
