#include "specreg/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "specreg/kernels.hpp"

namespace specreg {

void validate_spectrum(std::span<const double> lambda) {
  using Kind = SpectrumError::Kind;
  if (lambda.empty()) throw SpectrumError(Kind::empty, 0, "spectrum is empty");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const std::size_t k = i + 1;
    if (!std::isfinite(lambda[i]))
      throw SpectrumError(Kind::non_finite, k, "spectrum: non-finite eigenvalue at k=" + std::to_string(k));
    if (i > 0 && lambda[i] > lambda[i - 1])
      throw SpectrumError(Kind::monotonicity, k,
                          "spectrum: eigenvalues must be nonincreasing; violated at k=" + std::to_string(k));
    if (!(lambda[i] > 0.0))
      throw SpectrumError(Kind::positivity, k, "spectrum: eigenvalue at k=" + std::to_string(k) + " is not positive");
  }
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < kSpectrumGuard * lambda.front()) {
      std::ostringstream msg;
      msg << "spectrum: lambda(" << i + 1 << ") = " << lambda[i] << " is below 1e-150 * lambda(1) = "
          << kSpectrumGuard * lambda.front() << " (severely ill-posed beyond the supported range)";
      throw SpectrumError(Kind::guard, i + 1, msg.str());
    }
  }
}

Spectrum::Spectrum(std::vector<double> lambda) : lambda_(std::move(lambda)) {
  validate_spectrum(lambda_);
  inverse_.resize(lambda_.size());
  inverse_sqrt_.resize(lambda_.size());
  for (std::size_t k = 0; k < lambda_.size(); ++k) {
    inverse_[k] = 1.0 / lambda_[k];
    inverse_sqrt_[k] = 1.0 / std::sqrt(lambda_[k]);
  }
}

Spectrum make_polynomial_spectrum(std::size_t n, double beta) {
  if (n == 0) throw ValidationError("polynomial spectrum: n must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("polynomial spectrum: beta must be finite and >= 0");
  // log check first so that the guard message is ours, not a positivity error on underflow
  if (beta * std::log(static_cast<double>(n)) > -std::log(kSpectrumGuard))
    throw ValidationError("polynomial spectrum: n^-beta falls below the 1e-150 guard (beta too large for n)");
  std::vector<double> lambda(n);
  for (std::size_t k = 0; k < n; ++k) lambda[k] = std::pow(static_cast<double>(k + 1), -beta);
  return Spectrum(std::move(lambda));
}

Spectrum make_exponential_spectrum(std::size_t n, double beta) {
  if (n == 0) throw ValidationError("exponential spectrum: n must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("exponential spectrum: beta must be finite and > 0");
  if (beta * static_cast<double>(n - 1) > -std::log(kSpectrumGuard))
    throw ValidationError("exponential spectrum: exp(-beta n) falls below the 1e-150 guard relative to exp(-beta)");
  std::vector<double> lambda(n);
  for (std::size_t k = 0; k < n; ++k) lambda[k] = std::exp(-beta * static_cast<double>(k + 1));
  return Spectrum(std::move(lambda));
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : DenseMatrix(rows, cols, std::vector<double>(rows * cols)) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows_ == 0 || cols_ == 0) throw ValidationError("matrix: dimensions must be positive");
  if (data_.size() != rows_ * cols_) throw ValidationError("matrix: entry count does not match dimensions");
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw ValidationError("matrix: non-finite entry at row " + std::to_string(i / cols_ + 1) + ", column " +
                            std::to_string(i % cols_ + 1));
}

DenseMatrix DenseMatrix::gram() const {
  DenseMatrix g(cols_, cols_);
  for (std::size_t i = 0; i < cols_; ++i) {
    for (std::size_t j = i; j < cols_; ++j) {
      kernels::CompensatedSum acc;
      for (std::size_t r = 0; r < rows_; ++r) acc.add((*this)(r, i) * (*this)(r, j));
      g(i, j) = acc.value();
      g(j, i) = g(i, j);
    }
  }
  return g;
}

double DenseMatrix::frobenius_norm() const {
  kernels::CompensatedSum acc;
  for (double v : data_) acc.add(v * v);
  return std::sqrt(acc.value());
}

SymmetricEigen jacobi_eigen(const DenseMatrix& symmetric) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw ValidationError("jacobi: matrix is not square");

  DenseMatrix a = symmetric;
  DenseMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  const double norm = symmetric.frobenius_norm();
  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  constexpr std::size_t kMaxSweeps = 100;
  std::size_t sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    const double off = off_diagonal();
    if (off == 0.0 || off <= 1e-17 * norm) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // negligible against both diagonal entries: drop it
        if (sweep > 3 && std::abs(app) + 100.0 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 100.0 * std::abs(apq) == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = a(r, p);
          const double h = a(r, q);
          a(r, p) = a(p, r) = g - s * (h + g * tau);
          a(r, q) = a(q, r) = h + s * (g - h * tau);
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double g = v(r, p);
          const double h = v(r, q);
          v(r, p) = g - s * (h + g * tau);
          v(r, q) = h + s * (g - h * tau);
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out{std::vector<double>(n), DenseMatrix(n, n), sweep};
  for (std::size_t col = 0; col < n; ++col) {
    out.values[col] = a(order[col], order[col]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, col) = v(r, order[col]);
  }
  return out;
}

Decomposition decompose(const DenseMatrix& a) {
  if (a.cols() > kMaxDecomposeDim)
    throw ValidationError("decompose: n = " + std::to_string(a.cols()) + " exceeds the dense limit of " +
                          std::to_string(kMaxDecomposeDim));
  SymmetricEigen eig = jacobi_eigen(a.gram());

  const double top = eig.values.front();
  if (!(top > 0.0)) throw ValidationError("decompose: A^T A is zero");
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    const double lam = eig.values[k];
    if (!(lam >= kSpectrumGuard * top)) {
      std::ostringstream msg;
      msg << "decompose: A^T A is numerically singular: lambda(" << k + 1 << ") = " << lam
          << " is below 1e-150 * lambda(1); rank-deficient A is not supported";
      throw ValidationError(msg.str());
    }
    if (lam < kConditioningWarning * top) {
      std::ostringstream msg;
      msg << "lambda(" << k + 1 << ") = " << lam << " is below 1e-14 * lambda(1); eigenvalue kept as computed";
      warnings.push_back(msg.str());
    }
  }
  return Decomposition{Spectrum(std::move(eig.values)), std::move(eig.vectors), std::move(warnings), eig.sweeps};
}

}  // namespace specreg
