#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bgcmeta::csv {

/// A parsed CSV file. Lines starting with '#' and blank lines are skipped;
/// `line_numbers[i]` is the 1-based source line of `rows[i]`.
struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Column position by name; throws InputError naming the file if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  /// Numeric cell; errors carry file, line and column.
  double number(std::size_t row, std::size_t col) const;
};

Table parse(std::istream& in, std::string source);
Table read(const std::filesystem::path& path);

double parse_double(std::string_view text);
/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Writes comma-separated rows with optional leading '#' comment lines.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void comment(std::string_view text);
  void row(const std::vector<std::string>& cells);
  void row(std::string_view first, const std::vector<double>& values);
  void numbers(const std::vector<double>& values);

 private:
  std::ostream& out_;
};

}  // namespace bgcmeta::csv
