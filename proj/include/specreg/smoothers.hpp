#pragma once

// Ordered-smoother families evaluated on finite alpha-grids.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "specreg/spectra.hpp"

namespace specreg {

/// h = 1{lambda >= alpha}
struct Cutoff {
  bool operator==(const Cutoff&) const = default;
};

/// h = lambda^q / (lambda + alpha)^q; q = 1 is classical Tikhonov-Phillips.
struct Tikhonov {
  int order = 1;
  bool operator==(const Tikhonov&) const = default;
};

/// h = 1 - (1 - lambda / a)^(k + 1) after k iterations, alpha = 1/k.
/// step = 0 means the default a = 1.1 lambda(1).
struct Landweber {
  double step = 0.0;
  bool operator==(const Landweber&) const = default;
};

/// h = [1 - alpha b(1/lambda)]_+ with b(x) = x^nu.
struct Pinsker {
  double nu = 1.0;
  bool operator==(const Pinsker&) const = default;
};

using SmootherFamily = std::variant<Cutoff, Tikhonov, Landweber, Pinsker>;

std::string family_name(const SmootherFamily& family);

/// Throws ValidationError when the family parameters are invalid for the spectrum.
void validate_family(const SmootherFamily& family, const Spectrum& spectrum);

/// Landweber step actually used (resolves the 1.1 lambda(1) default).
double landweber_step(const Landweber& family, const Spectrum& spectrum);

// Scalar weight formulas.
double cutoff_weight(double lambda, double alpha);
double tikhonov_weight(double lambda, double alpha, int order);
double landweber_weight(double lambda, double step, long long iterations);
double pinsker_weight(double lambda, double alpha, double nu);

struct GridSpec {
  enum class Kind {
    natural,    ///< cutoff: the n eigenvalue thresholds; landweber: iterations 1..count
    geometric,  ///< count log-spaced alphas in [alpha_min, alpha_max]
    explicit_alphas,
  };
  Kind kind = Kind::geometric;
  std::size_t count = 100;
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::vector<double> alphas;

  bool operator==(const GridSpec&) const = default;
};

/// Default grid for a family: natural for cutoff and landweber, a 100-point
/// geometric grid otherwise.
GridSpec default_grid(const SmootherFamily& family);

/// Weights h[g][k] on a finite grid. Row 0 is the maximal-smoothing end
/// (alpha-bar); smoothing decreases with the row index. Immutable.
class SmootherGrid {
 public:
  /// Direct construction from weights; used for hand-built grids. Only the
  /// [0, 1] range and the shapes are checked here; see verify_ordered().
  SmootherGrid(std::optional<SmootherFamily> family, std::shared_ptr<const Spectrum> spectrum,
               std::vector<double> alphas, std::vector<double> weights);

  std::size_t size() const noexcept { return alphas_.size(); }
  std::size_t dim() const noexcept { return spectrum_->size(); }
  const std::optional<SmootherFamily>& family() const noexcept { return family_; }
  const Spectrum& spectrum() const noexcept { return *spectrum_; }
  const std::shared_ptr<const Spectrum>& spectrum_ptr() const noexcept { return spectrum_; }
  std::span<const double> alphas() const noexcept { return alphas_; }
  double alpha(std::size_t g) const { return alphas_.at(g); }

  /// Row g of the weight matrix, without copying. Throws std::out_of_range.
  std::span<const double> weights_at(std::size_t g) const;

  /// Largest |log(alpha_g / alpha_{g+1})| over consecutive finite alphas.
  double max_log_spacing() const;

 private:
  std::optional<SmootherFamily> family_;
  std::shared_ptr<const Spectrum> spectrum_;
  std::vector<double> alphas_;
  std::vector<double> weights_;
};

SmootherGrid build_grid(const SmootherFamily& family, std::shared_ptr<const Spectrum> spectrum, const GridSpec& spec);

/// Tolerance used by verify_ordered for the cross-row comparison.
inline constexpr double kOrderedTolerance = 1e-12;

/// Outcome of the ordering check. Indices are 0-based.
struct OrderedCheck {
  enum class Failure { none, row_not_monotone, rows_cross };
  Failure failure = Failure::none;
  std::size_t g1 = 0;
  std::size_t g2 = 0;
  /// rows_cross: h[g1][k_prime] < h[g2][k_prime] but h[g1][k] > h[g2][k] + tol.
  /// row_not_monotone: the row g1 rises at k_prime and falls at k (or vice versa).
  std::size_t k_prime = 0;
  std::size_t k = 0;

  bool ok() const noexcept { return failure == Failure::none; }
  std::string describe() const;
};

OrderedCheck verify_ordered(const SmootherGrid& grid);

}  // namespace specreg
