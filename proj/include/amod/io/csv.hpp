#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "amod/core/errors.hpp"

namespace amod::io {

// Splits one CSV line on commas. Quoting is not supported; none of the file
// formats here need it.
inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

inline long long parse_int(std::string_view s, const std::string& context) {
  long long value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw InputError(context + ": expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

inline double parse_double(std::string_view s, const std::string& context) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty() || !std::isfinite(value)) {
    throw InputError(context + ": expected a number, got '" + std::string(s) + "'");
  }
  return value;
}

// Reads the header line and checks it against the expected column list.
inline void expect_header(std::istream& in, std::string_view expected, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": missing header '" + std::string(expected) + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) {
    throw InputError(source + ": header '" + line + "' does not match '" + std::string(expected) + "'");
  }
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace amod::io
