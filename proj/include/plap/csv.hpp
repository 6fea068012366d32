#pragma once

#include <cstdio>
#include <string>

namespace plap {

/// Round-trippable, locale-independent number formatting for CSV output.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace plap
