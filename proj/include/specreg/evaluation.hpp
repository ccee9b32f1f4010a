#pragma once

// Exact risk functionals, the excess-risk identity, and the Monte Carlo
// engine used to check the oracle inequalities at desk scale.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "specreg/penalty.hpp"
#include "specreg/selection.hpp"
#include "specreg/smoothers.hpp"
#include "specreg/spectra.hpp"

namespace specreg {

/// theta(k) = k^-s
struct PowerSignal {
  double s = 1.0;
  bool operator==(const PowerSignal&) const = default;
};
/// theta = w e_j, j 1-based
struct SpikeSignal {
  std::size_t j = 1;
  double w = 1.0;
  bool operator==(const SpikeSignal&) const = default;
};
/// Random theta on the boundary of sum theta(k)^2 b^2(1/lambda(k)) <= W, b(x) = x^nu.
struct EllipsoidSignal {
  double W = 1.0;
  double nu = 1.0;
  std::uint64_t seed = 0;
  bool operator==(const EllipsoidSignal&) const = default;
};
struct ZeroSignal {
  bool operator==(const ZeroSignal&) const = default;
};
struct ExplicitSignal {
  std::vector<double> values;
  bool operator==(const ExplicitSignal&) const = default;
};

using SignalSpec = std::variant<PowerSignal, SpikeSignal, EllipsoidSignal, ZeroSignal, ExplicitSignal>;

std::vector<double> make_signal(const SignalSpec& spec, const Spectrum& spectrum);

/// L_alpha(theta) = sum (1 - h)^2 theta^2 + sigma^2 sum lambda^-1 h^2.
double oracle_risk(std::span<const double> theta, std::span<const double> h, const Spectrum& spectrum, double sigma);

/// eta_alpha = sum lambda^-1 (2h - h^2)(xi^2 - 1).
double eta(std::span<const double> h, const Spectrum& spectrum, std::span<const double> xi);

struct ExcessIdentity {
  double lhs = 0.0;    ///< L - R[Y, Pen] - C from the definitions
  double rhs = 0.0;    ///< sigma^2 eta - (1 + gamma) sigma^2 Q - 2 sigma sum lambda^-1/2 (1 - h)^2 xi theta
  double scale = 0.0;  ///< L + R + |C|, the size of the terms the left side cancels

  /// |lhs - rhs| / scale. On ill-posed spectra |C| exceeds |lhs| by many
  /// orders of magnitude, so agreement is only meaningful at this scale.
  double relative_gap() const { return scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs); }
};

/// Evaluates both sides of the excess-risk decomposition independently.
/// The left side is accumulated in extended precision because the
/// constant C = -sigma^2 sum lambda^-1 xi^2 cancels against the residual
/// term and dominates on ill-posed spectra.
ExcessIdentity excess_identity_check(std::span<const double> theta, std::span<const double> h, const Spectrum& spectrum,
                                     double sigma, std::span<const double> xi, double qcirc, double gamma);

struct RiskCurve {
  std::vector<double> l_alpha;  ///< L_alpha(theta) per row
  std::vector<double> rbar;     ///< L_alpha + (1 + gamma) sigma^2 Q per row
  std::size_t ideal_row = 0;      ///< argmin of l_alpha
  std::size_t penalized_row = 0;  ///< argmin of rbar
  double ideal_risk = 0.0;        ///< min L_alpha
  double oracle_risk = 0.0;       ///< r(theta) = min rbar
};

RiskCurve risk_curve(std::span<const double> theta, const SmootherGrid& grid, const PenaltyTable& table, double sigma);

/// Seed of replication i's private normal stream.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication);

/// Standard-normal draws for replication i.
std::vector<double> draw_noise(std::uint64_t seed, std::uint64_t replication, std::size_t n);

struct MonteCarloInput {
  const SmootherGrid* grid = nullptr;
  const PenaltyTable* table = nullptr;
  std::vector<double> theta;
  double sigma = 0.0;
  std::size_t n_reps = 1;
  std::uint64_t seed = 0;
};

struct ReplicationResult {
  double loss = 0.0;        ///< ||theta - theta_hat||^2 in spectral coordinates
  double excess_sup = 0.0;  ///< max_g [eta_g - (1 + gamma) Q_g]_+
  std::size_t g_hat = 0;
};

ReplicationResult run_replication(const MonteCarloInput& input, std::size_t replication);

struct ExperimentReport {
  std::size_t n_reps = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double gamma = 0.0;
  double dbar = 0.0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  double oracle_risk = 0.0;        ///< r(theta)
  double ideal_oracle_risk = 0.0;  ///< min L_alpha(theta)
  double ratio = 0.0;              ///< mean_loss / r(theta)
  double ratio_se = 0.0;
  double oracle_inflation = 0.0;   ///< r(theta) / min L_alpha(theta)
  double noise_to_oracle = 0.0;    ///< sigma^2 Dbar / r(theta)
  double excess_sup_mean = 0.0;
  double excess_sup_se = 0.0;
  std::vector<std::size_t> selection_counts;
  RiskCurve curve;
};

/// Replications run on `threads` workers; each owns a private stream and
/// results are folded in replication order, so the report is identical for
/// any thread count.
ExperimentReport run_monte_carlo(const MonteCarloInput& input, unsigned threads = 1);

}  // namespace specreg
