#pragma once

// The excess-risk-balancing penalty.
//
//   D(alpha)   = sqrt(2 sum lambda^-2 (2h - h^2)^2), the standard deviation of
//                the excess-risk process eta_alpha
//   rho(k)     = sqrt(2) lambda^-1(k) (2h(k) - h(k)^2) / D, so sum rho^2 = 1
//   F(x)       = log(1 - 2x)/2 + x + 2x^2/(1 - 2x)
//   mu         solves sum_k F(mu rho(k)) = log(D / Dbar)
//   Qcirc      = 2 D mu sum_k rho^2 / (1 - 2 mu rho)
//   Pen        = 2 sum lambda^-1 h + (1 + gamma) Qcirc
//
// Dbar is D at the maximal-smoothing row of the grid; Qcirc vanishes there.

#include <cstddef>
#include <span>
#include <vector>

#include "specreg/smoothers.hpp"
#include "specreg/spectra.hpp"

namespace specreg {

double variance_scale(std::span<const double> h, const Spectrum& spectrum);

/// F(x) on [0, 1/2). Throws std::domain_error outside.
double f_of_x(double x);

/// Normalized variance profile. Throws std::domain_error when d == 0.
std::vector<double> rho(std::span<const double> h, const Spectrum& spectrum, double d);

/// sum_k F(mu rho(k)).
double f_sum(std::span<const double> rho, double mu);

/// Upper end of the bisection bracket, (1/2 - 1e-9) / max rho.
double mu_bracket(std::span<const double> rho);

/// Root of sum_k F(mu rho(k)) = target by bisection on [0, mu_bracket(rho)].
/// target == 0 returns 0 without iterating.
double solve_mu(std::span<const double> rho, double target);

/// 2 d mu sum rho^2 / (1 - 2 mu rho). Requires mu max(rho) < 1/2.
double q_circ(double d, double mu, std::span<const double> rho);

/// 2 sum lambda^-1 h + (1 + gamma) qcirc. Rejects gamma <= 0.
double penalty_value(std::span<const double> h, const Spectrum& spectrum, double qcirc, double gamma);

struct PenaltyRow {
  double d = 0.0;
  /// log(D / Dbar)
  double target = 0.0;
  double mu = 0.0;
  double qcirc = 0.0;
  double pen = 0.0;
};

struct PenaltyTable {
  double gamma = 0.0;
  double dbar = 0.0;
  std::vector<PenaltyRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  const PenaltyRow& operator[](std::size_t g) const { return rows[g]; }
};

/// Penalty quantities for every grid row. Rows are independent given Dbar and
/// may be computed on `threads` workers (0 = hardware concurrency); the result
/// does not depend on the thread count.
PenaltyTable build_table(const SmootherGrid& grid, double gamma, unsigned threads = 1);

}  // namespace specreg
