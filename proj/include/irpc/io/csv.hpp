#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "irpc/errors.hpp"
#include "irpc/fitting.hpp"
#include "irpc/trajectory_metrics.hpp"

namespace irpc::io {

// Comma-separated numeric table. A first line that does not parse as numbers
// is taken as the header. Blank lines are skipped; CR before LF is tolerated.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace detail

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line);
    if (first) {
      first = false;
      double tmp;
      if (!detail::parse_double(fields[0], tmp)) {
        table.header = std::move(fields);
        continue;
      }
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(number);
  }
  return table;
}

inline double field_as_double(const CsvTable& t, std::size_t row, std::size_t col,
                              const std::filesystem::path& path) {
  double v;
  if (col >= t.rows[row].size() || !detail::parse_double(t.rows[row][col], v))
    throw FormatError(fmt::format("{}:{}: expected a number in column {}", path.string(), t.line_numbers[row],
                                  col + 1));
  return v;
}

inline std::vector<Point3> read_points(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<Point3> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != 3)
      throw FormatError(fmt::format("{}:{}: expected 3 columns (x,y,z), found {}", path.string(),
                                    t.line_numbers[r], t.rows[r].size()));
    out.emplace_back(field_as_double(t, r, 0, path), field_as_double(t, r, 1, path), field_as_double(t, r, 2, path));
  }
  return out;
}

inline void write_points(const std::filesystem::path& path, std::span<const Point3> points) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "x,y,z\n";
  for (const auto& p : points) out << fmt::format("{},{},{}\n", p.x(), p.y(), p.z());
}

// Rows of t,x,y or t,x,y,z.
inline Trajectory read_trajectory(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<TrajectorySample> samples;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t cols = t.rows[r].size();
    if (cols != 3 && cols != 4)
      throw FormatError(fmt::format("{}:{}: expected t,x,y[,z], found {} columns", path.string(),
                                    t.line_numbers[r], cols));
    TrajectorySample s;
    s.timestamp = field_as_double(t, r, 0, path);
    s.position = {field_as_double(t, r, 1, path), field_as_double(t, r, 2, path),
                  cols == 4 ? field_as_double(t, r, 3, path) : 0.0};
    if (!samples.empty() && !(s.timestamp > samples.back().timestamp))
      throw FormatError(fmt::format("{}:{}: timestamps must be strictly increasing", path.string(),
                                    t.line_numbers[r]));
    samples.push_back(s);
  }
  return Trajectory(std::move(samples));
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "t,x,y,z\n";
  for (const auto& s : traj.samples())
    out << fmt::format("{},{},{},{}\n", s.timestamp, s.position.x(), s.position.y(), s.position.z());
}

}  // namespace irpc::io
