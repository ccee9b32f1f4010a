#include "specreg/selection.hpp"

#include <cmath>

#include "specreg/kernels.hpp"

namespace specreg {

SpectralObservation::SpectralObservation(std::vector<double> y, double sigma, std::shared_ptr<const Spectrum> spectrum)
    : y_(std::move(y)), sigma_(sigma), spectrum_(std::move(spectrum)) {
  if (!spectrum_) throw ValidationError("observation: missing spectrum");
  if (y_.size() != spectrum_->size())
    throw ValidationError("observation: " + std::to_string(y_.size()) + " coefficients for a spectrum of length " +
                          std::to_string(spectrum_->size()));
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) throw ValidationError("observation: sigma must be finite and >= 0");
  for (std::size_t k = 0; k < y_.size(); ++k)
    if (!std::isfinite(y_[k])) throw ValidationError("observation: non-finite y at k=" + std::to_string(k + 1));
}

SpectralObservation observe(std::span<const double> theta, std::span<const double> xi, double sigma,
                            std::shared_ptr<const Spectrum> spectrum) {
  if (!spectrum || theta.size() != spectrum->size() || xi.size() != spectrum->size())
    throw ValidationError("observe: theta, xi and spectrum lengths differ");
  const auto inv_sqrt = spectrum->inverse_sqrt();
  std::vector<double> y(theta.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = theta[k] + sigma * inv_sqrt[k] * xi[k];
  return SpectralObservation(std::move(y), sigma, std::move(spectrum));
}

double empirical_risk(const SpectralObservation& obs, std::span<const double> h, double pen) {
  if (h.size() != obs.size()) throw ValidationError("empirical_risk: weight length does not match observation");
  return kernels::active_kernels().residual(h, obs.y()) + obs.sigma() * obs.sigma() * pen;
}

std::vector<double> estimate_at(const SpectralObservation& obs, std::span<const double> h) {
  if (h.size() != obs.size()) throw ValidationError("estimate_at: weight length does not match observation");
  std::vector<double> out(h.size());
  const auto y = obs.y();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = h[k] * y[k];
  return out;
}

std::size_t argmin_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < values.size(); ++g)
    if (values[g] < values[best]) best = g;
  return best;
}

SelectionResult select(const SpectralObservation& obs, const SmootherGrid& grid, const PenaltyTable& table) {
  if (table.size() != grid.size()) throw ValidationError("select: penalty table and grid sizes differ");
  if (&obs.spectrum() != &grid.spectrum() && !(obs.spectrum() == grid.spectrum())) throw ValidationError("select: observation and grid use different spectra");

  SelectionResult result;
  result.r_values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) result.r_values[g] = empirical_risk(obs, grid.weights_at(g), table[g].pen);
  result.g_hat = argmin_first(result.r_values);
  result.alpha_hat = grid.alpha(result.g_hat);
  result.estimate = estimate_at(obs, grid.weights_at(result.g_hat));
  return result;
}

}  // namespace specreg
