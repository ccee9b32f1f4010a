// specreg: penalty tables, parameter selection, Monte Carlo risk simulation,
// invariant verification and dense ingestion for spectral regularization.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "specreg/commands.hpp"
#include "specreg/csv_io.hpp"

namespace fs = std::filesystem;
using namespace specreg;

namespace {

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<double> sigma;
  unsigned threads = 1;
  bool all_families = false;
};

ExperimentConfig resolve_config(const Options& opt) {
  ExperimentConfig config = load_config(opt.config.empty() ? "builtin:default" : opt.config);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.reps) config.n_reps = *opt.reps;
  return config;
}

void emit(const Options& opt, const std::string& file, const std::string& content) {
  if (opt.out.empty()) {
    std::cout << content;
    return;
  }
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) throw IoError("cannot create output directory '" + opt.out + "': " + ec.message());
  io::atomic_write(fs::path(opt.out) / file, content);
}

int run_penalty(const Options& opt) {
  emit(opt, "penalty.csv", penalty_csv(resolve_config(opt), opt.threads));
  return kExitOk;
}

int run_select(const Options& opt) {
  if (opt.data.empty()) throw ValidationError("select: --data <observation csv> is required");
  const ExperimentConfig config = resolve_config(opt);
  const auto y = io::parse_observation_csv(io::read_file(opt.data), opt.data);
  emit(opt, "select.json", select_json(config, y, opt.sigma).dump(2) + "\n");
  return kExitOk;
}

int run_simulate(const Options& opt) {
  ExperimentConfig config = resolve_config(opt);
  if (opt.sigma) config.sigma = *opt.sigma;
  const SimulationOutput result = simulate(config, opt.threads);
  Options placed = opt;
  if (placed.out.empty()) placed.out = ".";
  emit(placed, "report.json", result.report.dump(2) + "\n");
  emit(placed, "risk_curve.csv", result.risk_curve_csv);
  std::cout << result.summary << '\n';
  return kExitOk;
}

int run_verify(const Options& opt) {
  VerifyOptions vopt;
  vopt.all_families = opt.all_families;
  vopt.threads = opt.threads;
  const auto results = verify(resolve_config(opt), vopt);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << '[' << r.config << "] " << r.name;
    if (!r.passed && !r.detail.empty()) std::cout << " -- " << r.detail;
    std::cout << '\n';
    ok = ok && r.passed;
  }
  if (!opt.out.empty()) emit(opt, "verify.json", verify_json(results).dump(2) + "\n");
  return ok ? kExitOk : kExitInvariant;
}

int run_decompose(const Options& opt) {
  if (opt.data.empty()) throw ValidationError("decompose: --data <matrix csv> is required");
  const DecomposeOutput d = decompose_csv(io::read_file(opt.data), opt.data);
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
  if (opt.out.empty()) {
    std::cout << d.spectrum_csv;
  } else {
    emit(opt, "spectrum.csv", d.spectrum_csv);
    emit(opt, "basis.csv", d.basis_csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven spectral regularization: penalties, selection, and risk simulation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Config JSON path or builtin:<name> (default builtin:default)");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Override the config seed");
    sub->add_option("--reps", opt.reps, "Override the replication count");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  };

  auto* penalty = app.add_subcommand("penalty", "Emit the penalty table as CSV");
  add_common(penalty);
  auto* sel = app.add_subcommand("select", "Select the regularization parameter for observed data");
  add_common(sel);
  sel->add_option("--data", opt.data, "Observation CSV with header k,y")->required();
  sel->add_option("--sigma", opt.sigma, "Noise level (default: config sigma)");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo risk experiment");
  add_common(sim);
  sim->add_option("--sigma", opt.sigma, "Override the config noise level");
  auto* ver = app.add_subcommand("verify", "Run the invariant suite");
  add_common(ver);
  ver->add_flag("--all-families", opt.all_families, "Check every built-in family on the config spectrum");
  auto* dec = app.add_subcommand("decompose", "Eigendecomposition of A^T A from a dense matrix CSV");
  dec->add_option("--data", opt.data, "Matrix CSV, one row per line")->required();
  dec->add_option("--out", opt.out, "Output directory for spectrum.csv and basis.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*penalty) return run_penalty(opt);
    if (*sel) return run_select(opt);
    if (*sim) return run_simulate(opt);
    if (*ver) return run_verify(opt);
    if (*dec) return run_decompose(opt);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
