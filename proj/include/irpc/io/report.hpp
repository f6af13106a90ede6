#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "irpc/errors.hpp"

namespace irpc::io {

// Flat key=value document, one entry per line, in insertion order. Doubles
// are written in shortest round-trip form so reports are bit-stable.
class RunReport {
 public:
  explicit RunReport(std::string command) { set("command", std::move(command)); }

  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_)
      if (k == key) {
        v = std::move(value);
        return;
      }
    entries_.emplace_back(key, std::move(value));
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, fmt::format("{}", value)); }
  template <typename Int>
    requires std::is_integral_v<Int>
  void set(const std::string& key, Int value) {
    set(key, fmt::format("{}", value));
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Parses a report document back into a key -> value map.
inline std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

}  // namespace irpc::io
