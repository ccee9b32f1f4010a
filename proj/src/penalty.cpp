#include "specreg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "specreg/kernels.hpp"
#include "specreg/parallel.hpp"

namespace specreg {

double variance_scale(std::span<const double> h, const Spectrum& spectrum) {
  if (h.size() != spectrum.size()) throw ValidationError("variance_scale: weight length does not match spectrum");
  return std::sqrt(2.0 * kernels::active_kernels().variance_terms(h, spectrum.inverse()));
}

double f_of_x(double x) {
  if (!(x >= 0.0 && x < 0.5)) throw std::domain_error("F(x) is defined on [0, 1/2); got x = " + std::to_string(x));
  if (x < 0.05) {
    // F(x) = sum_{j>=2} 2^(j-1) (1 - 1/j) x^j; the closed form cancels badly here.
    double sum = 0.0;
    double pow2x = 2.0 * x * x;  // 2^(j-1) x^j at j = 2
    for (int j = 2; j < 60; ++j) {
      const double term = pow2x * (1.0 - 1.0 / j);
      sum += term;
      if (term < 1e-18 * sum) break;
      pow2x *= 2.0 * x;
    }
    return sum;
  }
  const double one_minus = 1.0 - 2.0 * x;
  return 0.5 * std::log1p(-2.0 * x) + x + 2.0 * x * x / one_minus;
}

std::vector<double> rho(std::span<const double> h, const Spectrum& spectrum, double d) {
  if (h.size() != spectrum.size()) throw ValidationError("rho: weight length does not match spectrum");
  if (!(d > 0.0)) throw std::domain_error("rho: D must be positive (all-zero weights have no variance profile)");
  const auto inv = spectrum.inverse();
  const double scale = std::sqrt(2.0) / d;
  std::vector<double> out(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) out[k] = scale * inv[k] * (2.0 * h[k] - h[k] * h[k]);
  return out;
}

double f_sum(std::span<const double> rho, double mu) {
  kernels::CompensatedSum acc;
  for (double r : rho)
    if (r != 0.0) acc.add(f_of_x(mu * r));
  return acc.value();
}

double mu_bracket(std::span<const double> rho) {
  const double top = rho.empty() ? 0.0 : *std::max_element(rho.begin(), rho.end());
  if (!(top > 0.0)) throw std::domain_error("solve_mu: rho has no positive entry");
  return (0.5 - 1e-9) / top;
}

double solve_mu(std::span<const double> rho, double target) {
  if (!(target >= 0.0) || !std::isfinite(target))
    throw std::invalid_argument("solve_mu: target must be finite and nonnegative");
  if (target == 0.0) return 0.0;

  double lo = 0.0;
  double hi = mu_bracket(rho);
  double f_hi = f_sum(rho, hi) - target;
  if (f_hi < 0.0) throw std::domain_error("solve_mu: target exceeds the objective at the bracket end");
  double f_lo = -target;
  const double stop = 1e-15 * std::max(1.0, target);

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f_sum(rho, mid) - target;
    if (std::abs(f_mid) <= stop) return mid;
    if (f_mid < 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

double q_circ(double d, double mu, std::span<const double> rho) {
  if (!(mu >= 0.0)) throw std::domain_error("q_circ: mu must be nonnegative");
  if (mu == 0.0) return 0.0;
  const double top = *std::max_element(rho.begin(), rho.end());
  if (!(mu * top < 0.5)) throw std::domain_error("q_circ: mu * max(rho) must stay below 1/2");
  return 2.0 * d * mu * kernels::active_kernels().qcirc_sum(rho, mu);
}

double penalty_value(std::span<const double> h, const Spectrum& spectrum, double qcirc, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("penalty: gamma must be positive");
  if (h.size() != spectrum.size()) throw ValidationError("penalty: weight length does not match spectrum");
  return 2.0 * kernels::active_kernels().weighted_sum(h, spectrum.inverse()) + (1.0 + gamma) * qcirc;
}

PenaltyTable build_table(const SmootherGrid& grid, double gamma, unsigned threads) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("penalty: gamma must be positive");
  const Spectrum& spectrum = grid.spectrum();

  PenaltyTable table;
  table.gamma = gamma;
  table.rows.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) { table.rows[g].d = variance_scale(grid.weights_at(g), spectrum); });

  table.dbar = table.rows.front().d;
  if (!(table.dbar > 0.0))
    throw ValidationError("penalty: the maximal-smoothing row has D = 0 (all weights zero); shrink alpha-bar");
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (table.rows[g].d < table.dbar)
      throw ValidationError("penalty: row g=" + std::to_string(g + 1) +
                            " has D below D(alpha-bar); the first grid row must be the maximal-smoothing end");

  parallel_for(grid.size(), threads, [&](std::size_t g) {
    PenaltyRow& row = table.rows[g];
    const auto h = grid.weights_at(g);
    if (row.d > table.dbar) {
      row.target = std::log(row.d / table.dbar);
      const std::vector<double> r = rho(h, spectrum, row.d);
      row.mu = solve_mu(r, row.target);
      row.qcirc = q_circ(row.d, row.mu, r);
    }
    row.pen = penalty_value(h, spectrum, row.qcirc, gamma);
  });
  return table;
}

}  // namespace specreg
