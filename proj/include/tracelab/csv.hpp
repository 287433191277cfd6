#pragma once

// Number formatting shared by every text output: 17 significant digits, so a
// value written and read back is bit-identical.

#include <cstdio>
#include <ostream>
#include <string>

#include "tracelab/linalg.hpp"

namespace tracelab {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Dense dump, one matrix row per line, comma-separated.
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

}  // namespace tracelab
