#pragma once

// Eigenvalue spectra of A^T A and the small dense ingestion path.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "specreg/error.hpp"

namespace specreg {

/// lambda(n) must be at least this fraction of lambda(1); keeps lambda^-2
/// representable in double.
inline constexpr double kSpectrumGuard = 1e-150;

/// Eigenvalues below this fraction of lambda(1) trigger a conditioning warning.
inline constexpr double kConditioningWarning = 1e-14;

/// Largest n accepted by decompose().
inline constexpr std::size_t kMaxDecomposeDim = 512;

/// Which spectrum invariant failed. `k` is the 1-based coordinate of the first
/// offending eigenvalue.
class SpectrumError : public ValidationError {
 public:
  enum class Kind { empty, non_finite, monotonicity, positivity, guard };

  SpectrumError(Kind kind, std::size_t k, const std::string& what)
      : ValidationError(what), kind_(kind), k_(k) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t k() const noexcept { return k_; }

 private:
  Kind kind_;
  std::size_t k_;
};

/// Throws SpectrumError for the first violated invariant: nonempty, finite,
/// nonincreasing, strictly positive, lambda(n) >= 1e-150 lambda(1).
void validate_spectrum(std::span<const double> lambda);

/// Decreasing positive eigenvalues lambda(1) >= ... >= lambda(n) > 0.
/// Immutable; caches lambda^-1 and lambda^-1/2 for the reductions.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> lambda);

  std::size_t size() const noexcept { return lambda_.size(); }
  double operator[](std::size_t k) const { return lambda_[k]; }
  std::span<const double> lambda() const noexcept { return lambda_; }
  std::span<const double> inverse() const noexcept { return inverse_; }
  std::span<const double> inverse_sqrt() const noexcept { return inverse_sqrt_; }

  /// lambda(1) / lambda(n)
  double condition_number() const noexcept { return lambda_.front() / lambda_.back(); }

  bool operator==(const Spectrum& other) const { return lambda_ == other.lambda_; }

 private:
  std::vector<double> lambda_;
  std::vector<double> inverse_;
  std::vector<double> inverse_sqrt_;
};

/// lambda(k) = k^-beta, k = 1..n.
Spectrum make_polynomial_spectrum(std::size_t n, double beta);

/// lambda(k) = exp(-beta k), k = 1..n.
Spectrum make_exponential_spectrum(std::size_t n, double beta);

/// Row-major m x n matrix.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  /// A^T A (cols x cols).
  DenseMatrix gram() const;
  double frobenius_norm() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct Decomposition {
  Spectrum spectrum;
  /// n x n; column k is the unit eigenvector for spectrum[k].
  DenseMatrix basis;
  /// Non-fatal conditioning notes (eigenvalues below 1e-14 lambda(1)).
  std::vector<std::string> warnings;
  std::size_t sweeps = 0;
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues sorted decreasing (stable on ties) without any
/// positivity requirement.
struct SymmetricEigen {
  std::vector<double> values;
  DenseMatrix vectors;
  std::size_t sweeps = 0;
};
SymmetricEigen jacobi_eigen(const DenseMatrix& symmetric);

/// Spectrum and eigenbasis of A^T A. Rejects n > 512, non-finite entries, and
/// Gram matrices that are singular beyond the spectrum guard.
Decomposition decompose(const DenseMatrix& a);

}  // namespace specreg
