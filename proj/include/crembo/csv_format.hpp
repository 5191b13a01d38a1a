#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crembo {

/// Shortest decimal form that round-trips, capped at 12 significant digits.
std::string format_double(double value);

/// Header-plus-rows CSV without quoting (none of our fields contain commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position; throws SchemaError when absent.
  std::size_t column(std::string_view name) const;
};

/// Throws SchemaError for an empty file or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace crembo
