#pragma once

// Flat key = value configuration. '#' starts a comment; later assignments
// win, so command-line overrides are applied after the file.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/io/csv.hpp"

namespace amod::io {

class KeyValueConfig {
 public:
  void parse(std::istream& in, const std::string& source = "config") {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (blank(line)) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InputError(where(source, line_no) + ": expected key = value");
      const auto key = trim(line.substr(0, eq));
      if (key.empty()) throw InputError(where(source, line_no) + ": empty key");
      values_[key] = trim(line.substr(eq + 1));
    }
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    parse(in, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_int(it->second, "config key " + key);
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, "config key " + key);
  }
  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw InputError("config key " + key + ": expected a boolean, got '" + it->second + "'");
  }
  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const {
    std::vector<std::string> items;
    const std::string raw = get(key, fallback);
    for (auto f : split_csv(raw)) {
      if (!f.empty()) items.emplace_back(f);
    }
    return items;
  }

  // Keys outside `known` (and not under "info.") are rejected.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
      if (key.rfind("info.", 0) == 0) continue;
      if (!known.count(key)) throw InputError("unknown config key '" + key + "'");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace amod::io
