#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "factorcov_cli/cli.hpp"

namespace factorcov::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

CsvMatrix parse_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::size_t> line_numbers;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (trim(line).empty()) continue;
    lines.push_back(split_cells(line));
    line_numbers.push_back(no);
  }
  if (lines.empty()) throw InputError(source + ": no data");

  CsvMatrix out;
  std::size_t first = 0;
  bool all_text = true;
  for (const auto& c : lines[0]) all_text = all_text && !parse_number(c);
  if (all_text) {
    out.header = lines[0];
    first = 1;
  }
  if (first == lines.size()) throw InputError(source + ": header but no data rows");

  const std::size_t cols = lines[first].size();
  out.values = Matrix(lines.size() - first, cols);
  for (std::size_t r = first; r < lines.size(); ++r) {
    if (lines[r].size() != cols) {
      throw InputError(source + ": line " + std::to_string(line_numbers[r]) + " has " +
                       std::to_string(lines[r].size()) + " cells, expected " +
                       std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = parse_number(lines[r][c]);
      if (!v) {
        throw InputError(source + ": non-numeric cell at row " + std::to_string(line_numbers[r]) +
                         ", column " + std::to_string(c + 1) + ": '" + lines[r][c] + "'");
      }
      out.values(r - first, c) = *v;
    }
  }
  return out;
}

CsvMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  return parse_matrix_csv(in, path);
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw InputError("write failed: " + path);
}

std::string sidecar_path(const std::string& output_path) {
  const auto slash = output_path.find_last_of('/');
  const auto dot = output_path.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? output_path.substr(0, dot) : output_path;
  const std::string json = stem + ".json";
  return json == output_path ? output_path + ".json" : json;
}

}  // namespace factorcov::cli
