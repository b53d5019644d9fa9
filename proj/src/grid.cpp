#include "qiup/grid.hpp"
#include "qiup/error.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qiup {

void Grid2D::validate(std::string_view what) const {
  if (!(pitch > 0.0) || !std::isfinite(pitch))
    throw InputError(fmt::format("{}: pitch must be positive, got {}", what, pitch));
  if (nx < 1 || ny < 1)
    throw InputError(fmt::format("{}: need at least one sample per axis, got {}x{}", what, nx, ny));
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y))
    throw InputError(fmt::format("{}: origin is not finite", what));
}

ObjectGrid aligned_object_grid(double pitch, double x_lo, double x_hi, double y_lo, double y_hi,
                               double x_boundary, double y_boundary) {
  if (!(pitch > 0.0) || !(x_hi > x_lo) || !(y_hi > y_lo))
    throw InputError("aligned_object_grid: empty extent or non-positive pitch");
  // Cell edges sit at boundary + k*pitch.
  const auto first_edge = [pitch](double lo, double boundary) {
    return boundary + std::floor((lo - boundary) / pitch) * pitch;
  };
  const auto count = [pitch](double first, double hi) {
    return static_cast<std::size_t>(std::ceil((hi - first) / pitch - 1e-9));
  };
  ObjectGrid g;
  g.pitch = pitch;
  const double ex = first_edge(x_lo, x_boundary);
  const double ey = first_edge(y_lo, y_boundary);
  g.nx = std::max<std::size_t>(1, count(ex, x_hi));
  g.ny = std::max<std::size_t>(1, count(ey, y_hi));
  g.origin_x = ex + 0.5 * pitch;
  g.origin_y = ey + 0.5 * pitch;
  g.validate("object grid");
  return g;
}

} // namespace qiup
