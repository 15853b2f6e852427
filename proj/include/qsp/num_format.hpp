#pragma once

#include <charconv>
#include <string>

namespace qsp {

// shortest decimal form that parses back to the identical double, so CSV
// output is lossless and byte-stable across runs
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace qsp
