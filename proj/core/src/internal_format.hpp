#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace critbatch::detail {

// Shortest round-trip formatting; keeps result files byte-stable.
inline std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(long long v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }

}  // namespace critbatch::detail
