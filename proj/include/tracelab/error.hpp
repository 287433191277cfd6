#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracelab {

enum class Errc {
  not_symmetric,
  not_positive_definite,
  no_convergence,
  shape_mismatch,
  not_a_pseudoinverse_pair,
  rank_too_large,
  invalid_spec,
  degenerate_triangle,
  s_out_of_range,
  no_interior_vertices,
  config_error,
  io_error,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::not_symmetric: return "NotSymmetric";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::not_a_pseudoinverse_pair: return "NotAPseudoinversePair";
    case Errc::rank_too_large: return "RankTooLarge";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::degenerate_triangle: return "DegenerateTriangle";
    case Errc::s_out_of_range: return "SOutOfRange";
    case Errc::no_interior_vertices: return "NoInteriorVertices";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tracelab
