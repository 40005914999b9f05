#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qfs {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Minimal comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const CsvTable& table, const std::filesystem::path& path);

/// Bar chart of (label, value) pairs as a small standalone SVG.
void write_bar_svg(const std::vector<std::pair<double, double>>& bars, double bar_width, const std::string& title,
                   const std::filesystem::path& path);

}  // namespace qfs
