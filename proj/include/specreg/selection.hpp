#pragma once

// Empirical risk and the data-driven choice of the regularization parameter.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "specreg/penalty.hpp"
#include "specreg/smoothers.hpp"
#include "specreg/spectra.hpp"

namespace specreg {

/// y(k) = theta(k) + sigma lambda^-1/2(k) xi(k), in the eigenbasis of A^T A.
class SpectralObservation {
 public:
  SpectralObservation(std::vector<double> y, double sigma, std::shared_ptr<const Spectrum> spectrum);

  std::span<const double> y() const noexcept { return y_; }
  double sigma() const noexcept { return sigma_; }
  const Spectrum& spectrum() const noexcept { return *spectrum_; }
  std::size_t size() const noexcept { return y_.size(); }

 private:
  std::vector<double> y_;
  double sigma_;
  std::shared_ptr<const Spectrum> spectrum_;
};

/// Builds y = theta + sigma lambda^-1/2 xi.
SpectralObservation observe(std::span<const double> theta, std::span<const double> xi, double sigma,
                            std::shared_ptr<const Spectrum> spectrum);

/// sum_k (1 - h(k))^2 y(k)^2 + sigma^2 pen.
double empirical_risk(const SpectralObservation& obs, std::span<const double> h, double pen);

/// h(k) y(k).
std::vector<double> estimate_at(const SpectralObservation& obs, std::span<const double> h);

struct SelectionResult {
  std::size_t g_hat = 0;  ///< 0-based grid row
  double alpha_hat = 0.0;
  std::vector<double> r_values;
  std::vector<double> estimate;
};

/// Index of the smallest value; ties go to the smaller index.
std::size_t argmin_first(std::span<const double> values);

/// Minimizes the penalized empirical risk over the grid rows. Ties resolve
/// toward more smoothing (smaller row index).
SelectionResult select(const SpectralObservation& obs, const SmootherGrid& grid, const PenaltyTable& table);

}  // namespace specreg
