#pragma once

// Experiment configuration: JSON (de)serialization and the built-in registry.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "specreg/evaluation.hpp"
#include "specreg/smoothers.hpp"
#include "specreg/spectra.hpp"

namespace specreg {

struct PolynomialSpectrumSpec {
  std::size_t n = 1;
  double beta = 0.0;
  bool operator==(const PolynomialSpectrumSpec&) const = default;
};
struct ExponentialSpectrumSpec {
  std::size_t n = 1;
  double beta = 1.0;
  bool operator==(const ExponentialSpectrumSpec&) const = default;
};
/// CSV with header k,lambda. Relative paths resolve against the config file.
struct CsvSpectrumSpec {
  std::string path;
  bool operator==(const CsvSpectrumSpec&) const = default;
};
struct ValuesSpectrumSpec {
  std::vector<double> values;
  bool operator==(const ValuesSpectrumSpec&) const = default;
};

using SpectrumSpec = std::variant<PolynomialSpectrumSpec, ExponentialSpectrumSpec, CsvSpectrumSpec, ValuesSpectrumSpec>;

struct ExperimentConfig {
  std::string name;
  SpectrumSpec spectrum = PolynomialSpectrumSpec{200, 1.0};
  SmootherFamily family = Tikhonov{2};
  GridSpec grid;
  /// Hand-built weight rows (one per explicit alpha). Replaces the family
  /// formula; used to inject grids that are not ordered.
  std::optional<std::vector<std::vector<double>>> weights;
  double gamma = 0.5;
  double sigma = 0.05;
  SignalSpec signal = PowerSignal{1.0};
  std::size_t n_reps = 200;
  std::uint64_t seed = 1;

  /// Directory used to resolve relative CSV paths; not serialized.
  std::filesystem::path base_dir;

  bool operator==(const ExperimentConfig& other) const;
};

nlohmann::json to_json(const ExperimentConfig& config);

/// Strict parse: unknown keys and wrong types are ValidationErrors.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Reads a config file, or a built-in when `source` is `builtin:<name>`.
ExperimentConfig load_config(const std::string& source);

/// Checks every parameter against its owning module without building grids.
void validate_config(const ExperimentConfig& config);

std::shared_ptr<const Spectrum> build_spectrum(const ExperimentConfig& config);
SmootherGrid build_config_grid(const ExperimentConfig& config, std::shared_ptr<const Spectrum> spectrum);

/// Named configurations shipped with the tool. "default" is first.
const std::vector<ExperimentConfig>& builtin_configs();
const ExperimentConfig& builtin_config(const std::string& name);

}  // namespace specreg
