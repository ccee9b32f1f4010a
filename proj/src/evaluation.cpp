#include "specreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "specreg/kernels.hpp"
#include "specreg/parallel.hpp"

namespace specreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": length mismatch");
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& values) {
  kernels::CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  MeanSe out{sum.value() / n, 0.0};
  if (values.size() > 1) {
    kernels::CompensatedSum sq;
    for (double v : values) sq.add((v - out.mean) * (v - out.mean));
    out.se = std::sqrt(sq.value() / (n - 1.0) / n);
  }
  return out;
}

}  // namespace

std::vector<double> make_signal(const SignalSpec& spec, const Spectrum& spectrum) {
  const std::size_t n = spectrum.size();
  return std::visit(
      overloaded{[&](const PowerSignal& p) {
                   std::vector<double> theta(n);
                   for (std::size_t k = 0; k < n; ++k) theta[k] = std::pow(static_cast<double>(k + 1), -p.s);
                   return theta;
                 },
                 [&](const SpikeSignal& s) {
                   if (s.j < 1 || s.j > n) throw ValidationError("signal: spike index j must lie in 1..n");
                   std::vector<double> theta(n, 0.0);
                   theta[s.j - 1] = s.w;
                   return theta;
                 },
                 [&](const EllipsoidSignal& e) {
                   if (!(e.W >= 0.0) || !(e.nu > 0.0)) throw ValidationError("signal: ellipsoid needs W >= 0 and nu > 0");
                   std::mt19937_64 rng(e.seed);
                   std::normal_distribution<double> normal;
                   std::vector<double> z(n);
                   kernels::CompensatedSum norm;
                   for (double& v : z) {
                     v = normal(rng);
                     norm.add(v * v);
                   }
                   const double scale = norm.value() > 0.0 ? std::sqrt(e.W / norm.value()) : 0.0;
                   std::vector<double> theta(n);
                   for (std::size_t k = 0; k < n; ++k) theta[k] = scale * z[k] * std::pow(spectrum[k], e.nu);
                   return theta;
                 },
                 [&](const ZeroSignal&) { return std::vector<double>(n, 0.0); },
                 [&](const ExplicitSignal& x) {
                   if (x.values.size() != n) throw ValidationError("signal: explicit values must have length n");
                   for (double v : x.values)
                     if (!std::isfinite(v)) throw ValidationError("signal: explicit values must be finite");
                   return x.values;
                 }},
      spec);
}

double oracle_risk(std::span<const double> theta, std::span<const double> h, const Spectrum& spectrum, double sigma) {
  check_lengths(theta.size(), h.size(), "oracle_risk");
  check_lengths(h.size(), spectrum.size(), "oracle_risk");
  const auto& kern = kernels::active_kernels();
  return kern.residual(h, theta) + sigma * sigma * kern.weighted_sq(h, spectrum.inverse());
}

double eta(std::span<const double> h, const Spectrum& spectrum, std::span<const double> xi) {
  check_lengths(h.size(), spectrum.size(), "eta");
  check_lengths(xi.size(), spectrum.size(), "eta");
  return kernels::active_kernels().eta(h, spectrum.inverse(), xi);
}

ExcessIdentity excess_identity_check(std::span<const double> theta, std::span<const double> h, const Spectrum& spectrum,
                                     double sigma, std::span<const double> xi, double qcirc, double gamma) {
  check_lengths(theta.size(), spectrum.size(), "excess_identity_check");
  check_lengths(h.size(), spectrum.size(), "excess_identity_check");
  check_lengths(xi.size(), spectrum.size(), "excess_identity_check");

  // lhs: L - R - C, each piece straight from its definition
  using ld = long double;
  const ld s = sigma;
  ld lhs = 0.0L;
  ld scale = 0.0L;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const ld lam = spectrum[k];
    const ld hk = h[k];
    const ld y = theta[k] + s * xi[k] / std::sqrt(lam);
    const ld loss_term = (1 - hk) * (1 - hk) * theta[k] * theta[k] + s * s * hk * hk / lam;
    const ld risk_term = (1 - hk) * (1 - hk) * y * y + s * s * 2 * hk / lam;
    const ld c_term = -s * s * xi[k] * xi[k] / lam;
    lhs += loss_term - risk_term - c_term;
    scale += loss_term + risk_term - c_term;
  }
  const ld q_term = s * s * (1 + static_cast<ld>(gamma)) * qcirc;
  lhs -= q_term;
  scale += q_term;

  // rhs: the stochastic decomposition
  kernels::CompensatedSum cross;
  const auto inv_sqrt = spectrum.inverse_sqrt();
  for (std::size_t k = 0; k < h.size(); ++k) cross.add(inv_sqrt[k] * (1.0 - h[k]) * (1.0 - h[k]) * xi[k] * theta[k]);
  const double rhs =
      sigma * sigma * eta(h, spectrum, xi) - (1.0 + gamma) * sigma * sigma * qcirc - 2.0 * sigma * cross.value();

  return {static_cast<double>(lhs), rhs, static_cast<double>(scale)};
}

RiskCurve risk_curve(std::span<const double> theta, const SmootherGrid& grid, const PenaltyTable& table, double sigma) {
  if (table.size() != grid.size()) throw ValidationError("risk_curve: penalty table and grid sizes differ");
  check_lengths(theta.size(), grid.dim(), "risk_curve");
  RiskCurve curve;
  curve.l_alpha.resize(grid.size());
  curve.rbar.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    curve.l_alpha[g] = oracle_risk(theta, grid.weights_at(g), grid.spectrum(), sigma);
    curve.rbar[g] = curve.l_alpha[g] + (1.0 + table.gamma) * sigma * sigma * table[g].qcirc;
  }
  curve.ideal_row = argmin_first(curve.l_alpha);
  curve.penalized_row = argmin_first(curve.rbar);
  curve.ideal_risk = curve.l_alpha[curve.ideal_row];
  curve.oracle_risk = curve.rbar[curve.penalized_row];
  return curve;
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication) {
  return splitmix64(seed ^ splitmix64(replication));
}

std::vector<double> draw_noise(std::uint64_t seed, std::uint64_t replication, std::size_t n) {
  std::mt19937_64 rng(replication_seed(seed, replication));
  std::normal_distribution<double> normal;
  std::vector<double> xi(n);
  for (double& v : xi) v = normal(rng);
  return xi;
}

ReplicationResult run_replication(const MonteCarloInput& input, std::size_t replication) {
  const SmootherGrid& grid = *input.grid;
  const PenaltyTable& table = *input.table;
  const std::vector<double> xi = draw_noise(input.seed, replication, grid.dim());
  const SpectralObservation obs = observe(input.theta, xi, input.sigma, grid.spectrum_ptr());
  const SelectionResult sel = select(obs, grid, table);

  ReplicationResult out;
  out.g_hat = sel.g_hat;
  out.loss = kernels::active_kernels().loss(input.theta, grid.weights_at(sel.g_hat), obs.y());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double excess = eta(grid.weights_at(g), grid.spectrum(), xi) - (1.0 + table.gamma) * table[g].qcirc;
    out.excess_sup = std::max(out.excess_sup, excess);
  }
  if (!std::isfinite(out.loss) || !std::isfinite(out.excess_sup))
    throw ValidationError("monte carlo: non-finite result in replication " + std::to_string(replication));
  return out;
}

ExperimentReport run_monte_carlo(const MonteCarloInput& input, unsigned threads) {
  if (input.grid == nullptr || input.table == nullptr) throw ValidationError("monte carlo: missing grid or table");
  if (input.n_reps < 1) throw ValidationError("monte carlo: n_reps must be at least 1");
  if (!(input.sigma >= 0.0) || !std::isfinite(input.sigma)) throw ValidationError("monte carlo: sigma must be >= 0");
  check_lengths(input.theta.size(), input.grid->dim(), "monte carlo theta");

  std::vector<ReplicationResult> reps(input.n_reps);
  parallel_for(input.n_reps, threads, [&](std::size_t i) { reps[i] = run_replication(input, i); });

  ExperimentReport report;
  report.n_reps = input.n_reps;
  report.seed = input.seed;
  report.sigma = input.sigma;
  report.gamma = input.table->gamma;
  report.dbar = input.table->dbar;
  report.curve = risk_curve(input.theta, *input.grid, *input.table, input.sigma);
  report.oracle_risk = report.curve.oracle_risk;
  report.ideal_oracle_risk = report.curve.ideal_risk;

  std::vector<double> losses(reps.size());
  std::vector<double> sups(reps.size());
  report.selection_counts.assign(input.grid->size(), 0);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    losses[i] = reps[i].loss;
    sups[i] = reps[i].excess_sup;
    ++report.selection_counts[reps[i].g_hat];
  }
  const MeanSe loss = mean_and_se(losses);
  const MeanSe sup = mean_and_se(sups);
  report.mean_loss = loss.mean;
  report.se_loss = loss.se;
  report.excess_sup_mean = sup.mean;
  report.excess_sup_se = sup.se;
  if (report.oracle_risk > 0.0) {
    report.ratio = loss.mean / report.oracle_risk;
    report.ratio_se = loss.se / report.oracle_risk;
    report.noise_to_oracle = input.sigma * input.sigma * report.dbar / report.oracle_risk;
  }
  if (report.ideal_oracle_risk > 0.0) report.oracle_inflation = report.oracle_risk / report.ideal_oracle_risk;
  return report;
}

}  // namespace specreg
