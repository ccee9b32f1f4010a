#include "specreg/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace specreg::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

double parse_number(std::string_view field, std::string_view source, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ValidationError(where(source, line) + "cannot parse '" + std::string(field) + "' as a number");
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++number;
    const std::string_view t = trim(raw);
    if (!t.empty() && t.front() != '#') lines.push_back({number, t});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::vector<double> parse_indexed(std::string_view text, std::string_view source, std::string_view value_name) {
  const auto lines = content_lines(text);
  const std::string header = "k," + std::string(value_name);
  if (lines.empty()) throw ValidationError(std::string(source) + ": empty file, expected header '" + header + "'");
  {
    auto fields = split(lines.front().text);
    if (fields.size() != 2 || trim(fields[0]) != "k" || trim(fields[1]) != value_name)
      throw ValidationError(where(source, lines.front().number) + "expected header '" + header + "'");
  }
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [number, line] = lines[i];
    const auto fields = split(line);
    if (fields.size() != 2)
      throw ValidationError(where(source, number) + "expected 2 fields, found " + std::to_string(fields.size()));
    const double k = parse_number(fields[0], source, number);
    if (k != static_cast<double>(values.size() + 1))
      throw ValidationError(where(source, number) + "expected k = " + std::to_string(values.size() + 1));
    values.push_back(parse_number(fields[1], source, number));
  }
  if (values.empty()) throw ValidationError(std::string(source) + ": no data rows");
  return values;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return buf.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("error while writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

DenseMatrix parse_matrix_csv(std::string_view text, std::string_view source) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ValidationError(std::string(source) + ": empty matrix file");
  std::size_t cols = 0;
  std::vector<double> data;
  for (const auto& [number, line] : lines) {
    const auto fields = split(line);
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols)
      throw ValidationError(where(source, number) + "expected " + std::to_string(cols) + " columns, found " +
                            std::to_string(fields.size()));
    for (auto f : fields) data.push_back(parse_number(f, source, number));
  }
  return DenseMatrix(lines.size(), cols, std::move(data));
}

std::vector<double> parse_spectrum_csv(std::string_view text, std::string_view source) {
  return parse_indexed(text, source, "lambda");
}

std::vector<double> parse_observation_csv(std::string_view text, std::string_view source) {
  return parse_indexed(text, source, "y");
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "k,lambda\n";
  for (std::size_t k = 0; k < spectrum.size(); ++k) out << k + 1 << ',' << format_double(spectrum[k]) << '\n';
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (j) out << ',';
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

}  // namespace specreg::io
