#include "specreg/commands.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "specreg/csv_io.hpp"
#include "specreg/evaluation.hpp"
#include "specreg/penalty.hpp"
#include "specreg/selection.hpp"

namespace specreg {

using nlohmann::json;
using io::format_double;

namespace {

std::string config_comment(const ExperimentConfig& config) { return "# config=" + to_json(config).dump() + "\n"; }

// Slack for the penalty inequalities; none of them is tight away from
// D = Dbar, so this only absorbs rounding.
constexpr double kInequalitySlack = 1e-10;
constexpr double kNormalizationTol = 1e-12;
constexpr double kResidualTol = 1e-12;
constexpr double kIdentityTol = 1e-10;

struct Checker {
  std::string config;
  std::vector<InvariantResult>* out;

  void record(const std::string& name, bool passed, const std::string& detail = {}) {
    out->push_back({config, name, passed, detail});
  }
};

void penalty_invariants(Checker& check, const SmootherGrid& grid, const PenaltyTable& table) {
  const Spectrum& spectrum = grid.spectrum();
  const std::size_t rows = table.size();
  auto row_label = [](std::size_t g) { return "g=" + std::to_string(g + 1); };

  {
    std::string detail;
    for (std::size_t g = 1; g < rows && detail.empty(); ++g)
      if (table[g].d < table[g - 1].d)
        detail = row_label(g) + ": D=" + format_double(table[g].d) + " < D(previous)=" + format_double(table[g - 1].d);
    check.record("D nondecreasing in g", detail.empty(), detail);
  }
  check.record("alpha-bar row has mu = Q = 0", table[0].mu == 0.0 && table[0].qcirc == 0.0,
               "mu=" + format_double(table[0].mu) + " Q=" + format_double(table[0].qcirc));

  std::string norm_fail, resid_fail;
  std::string log_bound, mu_bound, q_lower, q_upper, sandwich;
  for (std::size_t g = 0; g < rows; ++g) {
    const PenaltyRow& row = table[g];
    if (row.d <= 0.0) continue;
    const auto r = rho(grid.weights_at(g), spectrum, row.d);
    double s2 = 0.0;
    for (double v : r) s2 += v * v;
    if (norm_fail.empty() && std::abs(s2 - 1.0) > kNormalizationTol)
      norm_fail = row_label(g) + ": sum rho^2 = " + format_double(s2);
    if (row.d <= table.dbar) continue;

    const double t = row.target;
    const double residual = std::abs(f_sum(r, row.mu) - t);
    if (resid_fail.empty() && residual > kResidualTol * std::max(1.0, t))
      resid_fail = row_label(g) + ": |f(mu) - target| = " + format_double(residual);

    const double rhs_log = row.mu * row.qcirc / row.d;
    if (log_bound.empty() && t > rhs_log * (1 + kInequalitySlack))
      log_bound = row_label(g) + ": log(D/Dbar)=" + format_double(t) + " > mu Q/D=" + format_double(rhs_log);
    const double rhs_mu = std::min(0.5 * std::sqrt(t), 0.25);
    if (mu_bound.empty() && row.mu < rhs_mu * (1 - kInequalitySlack))
      mu_bound = row_label(g) + ": mu=" + format_double(row.mu) + " < " + format_double(rhs_mu);
    const double lower = row.d * std::sqrt(t);
    if (q_lower.empty() && row.qcirc < lower * (1 - kInequalitySlack))
      q_lower = row_label(g) + ": Q=" + format_double(row.qcirc) + " < D sqrt(log(D/Dbar))=" + format_double(lower);
    if (row.mu > 0.0) {
      const double upper = 2.0 * row.d / row.mu * t;
      if (q_upper.empty() && row.qcirc > upper * (1 + kInequalitySlack))
        q_upper = row_label(g) + ": Q=" + format_double(row.qcirc) + " > (2D/mu) log(D/Dbar)=" + format_double(upper);
      if (sandwich.empty() && (row.qcirc < lower * (1 - kInequalitySlack) || row.qcirc > upper * (1 + kInequalitySlack)))
        sandwich = row_label(g) + ": Q=" + format_double(row.qcirc) + " outside [" + format_double(lower) + ", " +
                   format_double(upper) + "]";
    }
  }
  check.record("normalization sum rho^2 = 1", norm_fail.empty(), norm_fail);
  check.record("root residual of the mu equation", resid_fail.empty(), resid_fail);
  check.record("log(D/Dbar) <= mu Q / D", log_bound.empty(), log_bound);
  check.record("mu >= min(sqrt(log(D/Dbar))/2, 1/4)", mu_bound.empty(), mu_bound);
  check.record("Q >= D sqrt(log(D/Dbar))", q_lower.empty(), q_lower);

  // Q/D nondecreasing along the grid wherever Q > 0
  std::string q_ratio;
  for (std::size_t g1 = 0; g1 < rows && q_ratio.empty(); ++g1)
    for (std::size_t g2 = 0; g2 < g1; ++g2) {
      const double q1 = table[g1].qcirc, q2 = table[g2].qcirc;
      if (!(q2 > 0.0)) continue;
      const double lhs = table[g1].d / table[g2].d;
      const double rhs = q1 / q2;
      if (lhs > rhs * (1 + kInequalitySlack)) {
        q_ratio = "D(" + row_label(g1) + ")/D(" + row_label(g2) + ")=" + format_double(lhs) + " > Q ratio " + format_double(rhs);
        break;
      }
    }
  check.record("D1/D2 <= Q1/Q2 for alpha1 <= alpha2", q_ratio.empty(), q_ratio);
  check.record("Q <= (2D/mu) log(D/Dbar)", q_upper.empty(), q_upper);
  check.record("sandwich D sqrt(log) <= Q <= (2D/mu) log", sandwich.empty(), sandwich);
}

void identity_invariant(Checker& check, const ExperimentConfig& config, const SmootherGrid& grid,
                        const PenaltyTable& table, std::size_t instances) {
  const std::vector<double> theta = make_signal(config.signal, grid.spectrum());
  std::mt19937_64 rng(replication_seed(config.seed, 0x1de7));
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::string detail;
  for (std::size_t i = 0; i < instances && detail.empty(); ++i) {
    const std::size_t g = pick(rng);
    const auto xi = draw_noise(config.seed ^ 0x1de7, i, grid.dim());
    const auto id = excess_identity_check(theta, grid.weights_at(g), grid.spectrum(), config.sigma, xi, table[g].qcirc,
                                          table.gamma);
    if (id.relative_gap() > kIdentityTol)
      detail = "instance " + std::to_string(i) + ", g=" + std::to_string(g + 1) + ": lhs=" + format_double(id.lhs) +
               " rhs=" + format_double(id.rhs);
  }
  check.record("excess-risk identity (" + std::to_string(instances) + " instances)", detail.empty(), detail);
}

void verify_one(const ExperimentConfig& config, const VerifyOptions& options, std::vector<InvariantResult>& out) {
  Checker check{config.name.empty() ? family_name(config.family) : config.name, &out};
  const auto spectrum = build_spectrum(config);
  const SmootherGrid grid = build_config_grid(config, spectrum);

  const OrderedCheck ordered = verify_ordered(grid);
  check.record("ordered smoother", ordered.ok(), ordered.ok() ? "" : ordered.describe());

  PenaltyTable table;
  try {
    table = build_table(grid, config.gamma, options.threads);
  } catch (const ValidationError& e) {
    check.record("penalty table", false, e.what());
    return;
  }
  penalty_invariants(check, grid, table);
  identity_invariant(check, config, grid, table, options.identity_instances);
}

}  // namespace

std::string penalty_csv(const ExperimentConfig& config, unsigned threads) {
  validate_config(config);
  const auto spectrum = build_spectrum(config);
  const SmootherGrid grid = build_config_grid(config, spectrum);
  const PenaltyTable table = build_table(grid, config.gamma, threads);

  std::ostringstream out;
  out << config_comment(config) << "g,alpha,D,mu,qcirc,pen\n";
  for (std::size_t g = 0; g < table.size(); ++g)
    out << g + 1 << ',' << format_double(grid.alpha(g)) << ',' << format_double(table[g].d) << ','
        << format_double(table[g].mu) << ',' << format_double(table[g].qcirc) << ',' << format_double(table[g].pen) << '\n';
  return out.str();
}

json select_json(const ExperimentConfig& config, const std::vector<double>& y, std::optional<double> sigma) {
  validate_config(config);
  const auto spectrum = build_spectrum(config);
  const SmootherGrid grid = build_config_grid(config, spectrum);
  const PenaltyTable table = build_table(grid, config.gamma);
  const SpectralObservation obs(y, sigma.value_or(config.sigma), spectrum);
  const SelectionResult result = select(obs, grid, table);

  return json{{"config", to_json(config)},
              {"sigma", obs.sigma()},
              {"alpha_hat", result.alpha_hat},
              {"g_hat", result.g_hat + 1},
              {"grid_size", grid.size()},
              {"grid_max_log_spacing", grid.max_log_spacing()},
              {"risk_curve", result.r_values},
              {"estimate", result.estimate}};
}

SimulationOutput simulate(const ExperimentConfig& config, unsigned threads) {
  validate_config(config);
  const auto spectrum = build_spectrum(config);
  const SmootherGrid grid = build_config_grid(config, spectrum);
  const PenaltyTable table = build_table(grid, config.gamma, threads);

  MonteCarloInput input{&grid, &table, make_signal(config.signal, *spectrum), config.sigma, config.n_reps, config.seed};
  const ExperimentReport r = run_monte_carlo(input, threads);

  SimulationOutput out;
  out.report = json{{"config", to_json(config)},
                    {"n_reps", r.n_reps},
                    {"seed", r.seed},
                    {"substream", "mt19937_64(splitmix64(seed ^ splitmix64(replication)))"},
                    {"sigma", r.sigma},
                    {"gamma", r.gamma},
                    {"dbar", r.dbar},
                    {"mean_loss", r.mean_loss},
                    {"se_loss", r.se_loss},
                    {"oracle_risk", r.oracle_risk},
                    {"ideal_oracle_risk", r.ideal_oracle_risk},
                    {"ratio", r.ratio},
                    {"ratio_se", r.ratio_se},
                    {"oracle_inflation", r.oracle_inflation},
                    {"noise_to_oracle", r.noise_to_oracle},
                    {"excess_sup_mean", r.excess_sup_mean},
                    {"excess_sup_se", r.excess_sup_se},
                    {"excess_sup_over_dbar", r.dbar > 0.0 ? r.excess_sup_mean / r.dbar : 0.0},
                    {"ideal_row", r.curve.ideal_row + 1},
                    {"penalized_row", r.curve.penalized_row + 1},
                    {"grid_size", grid.size()},
                    {"grid_max_log_spacing", grid.max_log_spacing()},
                    {"selection_counts", r.selection_counts}};

  std::ostringstream csv;
  csv << config_comment(config) << "g,alpha,L,rbar,qcirc,selected\n";
  for (std::size_t g = 0; g < grid.size(); ++g)
    csv << g + 1 << ',' << format_double(grid.alpha(g)) << ',' << format_double(r.curve.l_alpha[g]) << ','
        << format_double(r.curve.rbar[g]) << ',' << format_double(table[g].qcirc) << ',' << r.selection_counts[g] << '\n';
  out.risk_curve_csv = csv.str();

  std::ostringstream summary;
  summary << (config.name.empty() ? "simulate" : config.name) << ": reps=" << r.n_reps
          << " mean_loss=" << format_double(r.mean_loss) << " r(theta)=" << format_double(r.oracle_risk)
          << " ratio=" << format_double(r.ratio) << " (se " << format_double(r.ratio_se) << ")"
          << " inflation=" << format_double(r.oracle_inflation)
          << " excess_sup/Dbar=" << format_double(r.dbar > 0.0 ? r.excess_sup_mean / r.dbar : 0.0);
  out.summary = summary.str();
  return out;
}

std::vector<InvariantResult> verify(const ExperimentConfig& config, const VerifyOptions& options) {
  validate_config(config);
  std::vector<InvariantResult> results;
  if (!options.all_families) {
    verify_one(config, options, results);
    return results;
  }
  const std::vector<SmootherFamily> families = {Cutoff{}, Tikhonov{1}, Tikhonov{2}, Landweber{}, Pinsker{1.0}};
  for (const auto& family : families) {
    ExperimentConfig c = config;
    c.family = family;
    c.grid = default_grid(family);
    c.weights.reset();
    c.name = (config.name.empty() ? std::string("config") : config.name) + "/" + family_name(family);
    if (const auto* t = std::get_if<Tikhonov>(&family)) c.name += std::to_string(t->order);
    verify_one(c, options, results);
  }
  return results;
}

json verify_json(const std::vector<InvariantResult>& results) {
  json list = json::array();
  bool all = true;
  for (const auto& r : results) {
    list.push_back({{"config", r.config}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    all = all && r.passed;
  }
  return json{{"passed", all}, {"results", list}};
}

DecomposeOutput decompose_csv(const std::string& matrix_text, const std::string& source) {
  const DenseMatrix a = io::parse_matrix_csv(matrix_text, source);
  const Decomposition d = decompose(a);
  DecomposeOutput out;
  std::ostringstream spectrum, basis;
  spectrum << "# source=" << source << "\n";
  io::write_spectrum_csv(spectrum, d.spectrum);
  basis << "# source=" << source << "\n";
  io::write_matrix_csv(basis, d.basis);
  out.spectrum_csv = spectrum.str();
  out.basis_csv = basis.str();
  out.warnings = d.warnings;
  return out;
}

}  // namespace specreg
