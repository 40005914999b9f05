#include "qfs/text_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qfs/errors.hpp"

namespace qfs {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (first) {
      table.header = split(line);
      first = false;
    } else {
      table.rows.push_back(split(line));
      if (table.rows.back().size() != table.header.size()) {
        throw std::invalid_argument("CSV row width differs from header in " + path.string());
      }
    }
  }
  if (first) throw std::invalid_argument("CSV file has no header: " + path.string());
  return table;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
}

void write_bar_svg(const std::vector<std::pair<double, double>>& bars, double bar_width, const std::string& title,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const double w = 480, h = 320, margin = 40;
  double x_lo = 0, x_hi = 1, y_hi = 1;
  if (!bars.empty()) {
    x_lo = bars.front().first;
    x_hi = bars.front().first + bar_width;
    y_hi = 0;
    for (const auto& [x, y] : bars) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x + bar_width);
      y_hi = std::max(y_hi, y);
    }
    if (y_hi <= 0) y_hi = 1;
    if (x_hi <= x_lo) x_hi = x_lo + 1;
  }
  auto sx = [&](double x) { return margin + (x - x_lo) / (x_hi - x_lo) * (w - 2 * margin); };
  auto sy = [&](double y) { return h - margin - y / y_hi * (h - 2 * margin); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin << "\" y2=\"" << h - margin
      << "\" stroke=\"black\"/>\n";
  for (const auto& [x, y] : bars) {
    out << "<rect x=\"" << format_double(sx(x)) << "\" y=\"" << format_double(sy(y)) << "\" width=\""
        << format_double(std::max(1.0, sx(x + bar_width) - sx(x))) << "\" height=\""
        << format_double(sy(0) - sy(y)) << "\" fill=\"steelblue\"/>\n";
  }
  out << "<text x=\"" << margin << "\" y=\"" << h - 10 << "\" font-size=\"11\">" << format_double(x_lo)
      << "</text>\n<text x=\"" << w - margin << "\" y=\"" << h - 10 << "\" font-size=\"11\" text-anchor=\"end\">"
      << format_double(x_hi) << "</text>\n</svg>\n";
}

}  // namespace qfs
