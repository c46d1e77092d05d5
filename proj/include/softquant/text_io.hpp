#pragma once

#include <cstdio>
#include <string>

namespace softquant {

// Shortest round-trip decimal form of a double; deterministic, so files
// built from the same run bytes-compare equal.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[64];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

// Compact fixed form for file names (no '+', no scientific notation for
// the magnitudes recipes use).
inline std::string format_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace softquant
