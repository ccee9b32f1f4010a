#pragma once

// Plain CSV readers/writers and atomic file output.

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "specreg/spectra.hpp"

namespace specreg::io {

/// 17 significant digits: round-trips every double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`, so readers
/// never observe a partial file. Throws IoError.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// One matrix row per line, comma-separated decimals. Blank lines and lines
/// starting with '#' are skipped. `source` labels error messages.
DenseMatrix parse_matrix_csv(std::string_view text, std::string_view source);

/// Header `k,lambda`, rows k = 1..n in order.
std::vector<double> parse_spectrum_csv(std::string_view text, std::string_view source);
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

/// Header `k,y`, rows k = 1..n in order.
std::vector<double> parse_observation_csv(std::string_view text, std::string_view source);

/// One matrix row per line, the format parse_matrix_csv reads.
void write_matrix_csv(std::ostream& out, const DenseMatrix& matrix);

}  // namespace specreg::io
