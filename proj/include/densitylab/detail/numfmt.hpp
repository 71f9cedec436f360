#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace densitylab::detail {

/// Shortest round-trip decimal form of a double. Deterministic, locale-free.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

}  // namespace densitylab::detail
