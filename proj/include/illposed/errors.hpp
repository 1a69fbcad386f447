#pragma once

#include <stdexcept>
#include <string>

namespace illposed {

/// Triangular or factored solve met an effectively-zero pivot.
class singular_operator_error : public std::runtime_error {
public:
  singular_operator_error(const std::string& what, double pivot)
      : std::runtime_error(what + " (pivot magnitude " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

private:
  double pivot_;
};

/// A dictionary/inverse-image column has (numerically) zero norm.
class degenerate_weight_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Gram diagonal entry is zero; coordinate descent cannot update that atom.
class degenerate_atom_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested SVD truncation level reaches numerically-zero singular values.
class truncation_limit_error : public std::runtime_error {
public:
  truncation_limit_error(const std::string& what, int max_usable)
      : std::runtime_error(what + " (largest usable K = " + std::to_string(max_usable) + ")"),
        max_usable_(max_usable) {}
  int max_usable() const noexcept { return max_usable_; }

private:
  int max_usable_;
};

/// Least-squares design matrix is rank deficient.
class rank_deficiency_error : public std::runtime_error {
public:
  rank_deficiency_error(const std::string& what, int effective_rank)
      : std::runtime_error(what + " (effective rank " + std::to_string(effective_rank) + ")"),
        effective_rank_(effective_rank) {}
  int effective_rank() const noexcept { return effective_rank_; }

private:
  int effective_rank_;
};

/// Exhaustive enumeration would exceed the configured budget.
class capacity_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An oracle-tuned estimator was requested without the true signal.
class oracle_unavailable_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written; message carries the path.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace illposed
