#pragma once

// Subcommand bodies, independent of argument parsing and file placement so
// they can be exercised directly.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specreg/config.hpp"

namespace specreg {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2, kExitInvariant = 3 };

/// `# config=<compact json>` followed by `g,alpha,D,mu,qcirc,pen`.
std::string penalty_csv(const ExperimentConfig& config, unsigned threads = 1);

/// Selection on observed coefficients y. sigma defaults to config.sigma.
nlohmann::json select_json(const ExperimentConfig& config, const std::vector<double>& y,
                           std::optional<double> sigma = std::nullopt);

struct SimulationOutput {
  nlohmann::json report;
  std::string risk_curve_csv;  ///< g,alpha,L,rbar,qcirc,selected
  std::string summary;
};

SimulationOutput simulate(const ExperimentConfig& config, unsigned threads = 1);

struct InvariantResult {
  std::string config;
  std::string name;
  bool passed = true;
  std::string detail;  ///< counterexample payload on failure
};

struct VerifyOptions {
  bool all_families = false;
  std::size_t identity_instances = 200;
  unsigned threads = 1;
};

std::vector<InvariantResult> verify(const ExperimentConfig& config, const VerifyOptions& options = {});
nlohmann::json verify_json(const std::vector<InvariantResult>& results);

struct DecomposeOutput {
  std::string spectrum_csv;
  std::string basis_csv;
  std::vector<std::string> warnings;
};

DecomposeOutput decompose_csv(const std::string& matrix_text, const std::string& source);

}  // namespace specreg
