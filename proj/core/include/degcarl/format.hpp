#pragma once

#include <cstdio>
#include <string>

namespace degcarl {

// Round-trip representation used in every CSV and report.
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace degcarl
