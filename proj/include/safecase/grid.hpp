#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace safecase::verifier {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quantization of the (distance, speed) plane. Distances in mm, speeds in mm/s.
struct Grid {
  std::int64_t d_max = 0;
  std::int64_t d_step = 0;
  std::int64_t v_max = 0;
  std::int64_t v_step = 0;

  /// Throws GridError unless steps are positive and divide their ranges.
  void validate() const;
  std::size_t cells() const { return static_cast<std::size_t>(d_max / d_step) + 1; }
  std::int64_t distance(std::size_t cell) const { return static_cast<std::int64_t>(cell) * d_step; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// "d_max=100 m, d_step=0.5 m, v_max=35 m/s, v_step=0.25 m/s". Items are
/// separated by commas or newlines; values need units and must be whole mm
/// or mm/s.
Grid parse_grid(std::string_view spec);
std::string render_grid(const Grid& g);

}  // namespace safecase::verifier
