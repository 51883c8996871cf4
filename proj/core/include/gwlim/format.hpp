#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace gwlim {

/// Shortest round-trip decimal form; the one formatter every serialized
/// number goes through, so identical runs produce identical bytes.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace gwlim
