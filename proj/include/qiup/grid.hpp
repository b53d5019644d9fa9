#pragma once
#include <cstddef>
#include <string_view>

namespace qiup {

/// Uniform square sampling of a transverse plane. Sample (ix, iy) sits at
/// (origin_x + ix*pitch, origin_y + iy*pitch) and represents the cell of
/// side `pitch` centred there.
struct Grid2D {
  double origin_x{0.0};
  double origin_y{0.0};
  double pitch{1.0};
  std::size_t nx{1};
  std::size_t ny{1};

  double x(std::size_t ix) const { return origin_x + static_cast<double>(ix) * pitch; }
  double y(std::size_t iy) const { return origin_y + static_cast<double>(iy) * pitch; }

  // Outer cell edges.
  double x_min() const { return origin_x - 0.5 * pitch; }
  double x_max() const { return origin_x + (static_cast<double>(nx) - 0.5) * pitch; }
  double y_min() const { return origin_y - 0.5 * pitch; }
  double y_max() const { return origin_y + (static_cast<double>(ny) - 0.5) * pitch; }

  std::size_t size() const { return nx * ny; }

  /// Throws InputError unless pitch > 0 and nx, ny >= 1.
  void validate(std::string_view what) const;
};

/// Object-plane sampling (x_o, y_o).
struct ObjectGrid : Grid2D {};

/// Camera-plane sampling (x_c, y_c).
struct CameraGrid : Grid2D {};

/// Grid of nx*ny samples centred on the origin.
template <class G>
G centered_grid(double pitch, std::size_t nx, std::size_t ny) {
  G g;
  g.pitch = pitch;
  g.nx = nx;
  g.ny = ny;
  g.origin_x = -0.5 * static_cast<double>(nx - 1) * pitch;
  g.origin_y = -0.5 * static_cast<double>(ny - 1) * pitch;
  g.validate("grid");
  return g;
}

/// Smallest grid with the given pitch that covers [x_lo, x_hi] x [y_lo, y_hi]
/// and has a cell boundary exactly at x = x_boundary (and y = y_boundary).
ObjectGrid aligned_object_grid(double pitch, double x_lo, double x_hi, double y_lo, double y_hi,
                               double x_boundary = 0.0, double y_boundary = 0.0);

} // namespace qiup
