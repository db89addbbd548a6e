#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "winscrt/errors.hpp"

namespace winscrt::csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline long parse_int(const std::string& cell, const char* col, std::size_t row) {
  long value = 0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || p != cell.data() + cell.size())
    throw_parse("BadCell", std::string("row ") + std::to_string(row) + ": column '" + col +
                               "' value '" + cell + "' is not an integer");
  return value;
}

inline double parse_double(const std::string& cell, const char* col, std::size_t row) {
  if (cell.empty())
    throw_parse("BadCell", std::string("row ") + std::to_string(row) + ": column '" + col + "' is empty");
  char* end = nullptr;
  double value = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || !std::isfinite(value))
    throw_parse("BadCell", std::string("row ") + std::to_string(row) + ": column '" + col +
                               "' value '" + cell + "' is not a finite number");
  return value;
}

}  // namespace winscrt::csv
