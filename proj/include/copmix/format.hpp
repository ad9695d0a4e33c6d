#pragma once

#include <charconv>
#include <string>

namespace copmix::detail {

// Locale-independent significant-digit formatting for diffable artifacts.
inline std::string fmt_sig(double x, int digits) {
  char buf[48];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, digits);
  return std::string(buf, end);
}

}  // namespace copmix::detail
