#include "qiup/scene.hpp"
#include "qiup/error.hpp"
#include "qiup/greymap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace qiup {

double wrap_phase(double theta) {
  double t = std::remainder(theta, 2.0 * std::numbers::pi);
  if (t <= -std::numbers::pi)
    t += 2.0 * std::numbers::pi;
  return t;
}

ObjectMask::ObjectMask(ObjectGrid grid, Raster<double> amplitude, Raster<double> phase)
    : grid_(grid), amplitude_(std::move(amplitude)), phase_(std::move(phase)) {
  grid_.validate("object grid");
  if (amplitude_.nx != grid_.nx || amplitude_.ny != grid_.ny || phase_.nx != grid_.nx ||
      phase_.ny != grid_.ny)
    throw InputError("object mask: sample arrays do not match the grid");
  for (double &a : amplitude_.data) {
    if (!std::isfinite(a) || a < 0.0 || a > 1.0 + 1e-12)
      throw InputError(fmt::format("object mask: |T| = {} outside [0, 1]", a));
    a = std::min(a, 1.0);
  }
  for (double &t : phase_.data) {
    if (!std::isfinite(t))
      throw InputError("object mask: non-finite phase");
    t = wrap_phase(t);
  }
}

ObjectMask ObjectMask::from_complex(const ObjectGrid &grid, const Raster<std::complex<double>> &t) {
  Raster<double> amp(t.nx, t.ny), ph(t.nx, t.ny);
  for (std::size_t i = 0; i < t.size(); ++i) {
    amp.data[i] = std::abs(t.data[i]);
    ph.data[i] = amp.data[i] > 0.0 ? std::arg(t.data[i]) : 0.0;
  }
  return ObjectMask(grid, std::move(amp), std::move(ph));
}

Raster<std::complex<double>> ObjectMask::transmission() const {
  Raster<std::complex<double>> t(grid_.nx, grid_.ny);
  for (std::size_t i = 0; i < t.size(); ++i)
    t.data[i] = std::polar(amplitude_.data[i], phase_.data[i]);
  return t;
}

double UsafTriplet::line_width() const {
  if (element < 1 || element > 6)
    throw InputError(fmt::format("USAF element must be 1..6, got {}", element));
  return 500e-6 / std::exp2(group + (element - 1) / 6.0);
}

namespace {

// Fraction of the cell [c - p/2, c + p/2] inside [lo, hi].
double overlap(double c, double p, double lo, double hi) {
  const double a = std::max(lo, c - 0.5 * p);
  const double b = std::min(hi, c + 0.5 * p);
  const double f = (b - a) / p;
  // Edges placed on cell boundaries leave rounding slivers.
  if (f < 1e-9)
    return 0.0;
  if (f > 1.0 - 1e-9)
    return 1.0;
  return f;
}

struct Rect {
  double x_lo, x_hi, y_lo, y_hi;
};

void require_inside(const ObjectGrid &g, const Rect &r, const char *what) {
  const double tol = 1e-9 * g.pitch;
  if (r.x_lo < g.x_min() - tol || r.x_hi > g.x_max() + tol || r.y_lo < g.y_min() - tol ||
      r.y_hi > g.y_max() + tol)
    throw InputError(fmt::format(
        "{} spans x [{:.6g}, {:.6g}] um, y [{:.6g}, {:.6g}] um, outside the grid "
        "x [{:.6g}, {:.6g}] um, y [{:.6g}, {:.6g}] um",
        what, r.x_lo * 1e6, r.x_hi * 1e6, r.y_lo * 1e6, r.y_hi * 1e6, g.x_min() * 1e6,
        g.x_max() * 1e6, g.y_min() * 1e6, g.y_max() * 1e6));
}

ObjectMask rasterize(const ObjectGrid &grid, const std::vector<Rect> &rects) {
  grid.validate("object grid");
  Raster<double> amp(grid.nx, grid.ny), ph(grid.nx, grid.ny);
  for (std::size_t iy = 0; iy < grid.ny; ++iy)
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      double a = 0.0;
      for (const Rect &r : rects)
        a += overlap(grid.x(ix), grid.pitch, r.x_lo, r.x_hi) *
             overlap(grid.y(iy), grid.pitch, r.y_lo, r.y_hi);
      amp(ix, iy) = std::min(a, 1.0);
    }
  return ObjectMask(grid, std::move(amp), std::move(ph));
}

void require_edge_inside(const ObjectGrid &grid, double x0, const char *what) {
  grid.validate("object grid");
  if (!(x0 >= grid.x_min() && x0 <= grid.x_max()))
    throw InputError(fmt::format("{} at x0 = {:.6g} um is outside the field of view [{:.6g}, {:.6g}] um",
                                 what, x0 * 1e6, grid.x_min() * 1e6, grid.x_max() * 1e6));
}

} // namespace

ObjectMask make_knife_edge(double x0, const ObjectGrid &grid) {
  require_edge_inside(grid, x0, "knife edge");
  const double big = std::abs(grid.x_max()) + std::abs(grid.x_min()) + std::abs(grid.y_max()) +
                     std::abs(grid.y_min()) + grid.pitch;
  return rasterize(grid, {Rect{x0, big, -big, big}});
}

ObjectMask make_point_pair(double d, const ObjectGrid &grid) {
  grid.validate("object grid");
  if (!(d >= 2.0 * grid.pitch))
    throw InputError(fmt::format("point pair: separation {:.6g} um is below two grid pitches ({:.6g} um)",
                                 d * 1e6, 2.0 * grid.pitch * 1e6));
  require_inside(grid, Rect{-0.5 * d, 0.5 * d, 0.0, 0.0}, "point pair");
  const auto nearest = [](double v, double origin, double pitch, std::size_t n) {
    const double idx = std::round((v - origin) / pitch);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(n - 1)));
  };
  Raster<double> amp(grid.nx, grid.ny), ph(grid.nx, grid.ny);
  const std::size_t iy = nearest(0.0, grid.origin_y, grid.pitch, grid.ny);
  amp(nearest(-0.5 * d, grid.origin_x, grid.pitch, grid.nx), iy) = 1.0;
  amp(nearest(0.5 * d, grid.origin_x, grid.pitch, grid.nx), iy) = 1.0;
  return ObjectMask(grid, std::move(amp), std::move(ph));
}

ObjectMask make_bar_triplet(double w, BarOrientation orientation, const ObjectGrid &grid) {
  if (!(w > 0.0))
    throw InputError("bar triplet: line width must be positive");
  std::vector<Rect> bars;
  for (int k = -1; k <= 1; ++k) {
    const double c = 2.0 * w * k;
    if (orientation == BarOrientation::vertical)
      bars.push_back({c - 0.5 * w, c + 0.5 * w, -2.5 * w, 2.5 * w});
    else
      bars.push_back({-2.5 * w, 2.5 * w, c - 0.5 * w, c + 0.5 * w});
  }
  require_inside(grid, Rect{-2.5 * w, 2.5 * w, -2.5 * w, 2.5 * w}, "bar triplet");
  return rasterize(grid, bars);
}

ObjectMask make_usaf_triplet(const UsafTriplet &spec, const ObjectGrid &grid) {
  return make_bar_triplet(spec.line_width(), spec.orientation, grid);
}

ObjectMask make_rectangle(double width, double height, const ObjectGrid &grid) {
  if (!(width > 0.0) || !(height > 0.0))
    throw InputError("rectangle: width and height must be positive");
  const Rect r{-0.5 * width, 0.5 * width, -0.5 * height, 0.5 * height};
  require_inside(grid, r, "rectangle");
  return rasterize(grid, {r});
}

ObjectMask make_phase_edge(double x0, double delta, const ObjectGrid &grid) {
  require_edge_inside(grid, x0, "phase edge");
  Raster<double> amp(grid.nx, grid.ny, 1.0), ph(grid.nx, grid.ny);
  const double step = wrap_phase(delta);
  for (std::size_t iy = 0; iy < grid.ny; ++iy)
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
      ph(ix, iy) = grid.x(ix) >= x0 ? step : 0.0;
  return ObjectMask(grid, std::move(amp), std::move(ph));
}

ObjectMask load_raster(const std::filesystem::path &path, double physical_width, RasterMode mode) {
  if (!(physical_width > 0.0))
    throw InputError("load_raster: physical width must be positive");
  const GreyMap map = read_greymap(path);
  const ObjectGrid grid =
      centered_grid<ObjectGrid>(physical_width / static_cast<double>(map.width), map.width, map.height);
  Raster<double> amp(grid.nx, grid.ny), ph(grid.nx, grid.ny);
  const double scale = 1.0 / static_cast<double>(map.maxval);
  for (std::size_t row = 0; row < map.height; ++row)
    for (std::size_t col = 0; col < map.width; ++col) {
      const double g = map.samples[row * map.width + col] * scale;
      const std::size_t iy = map.height - 1 - row;
      if (mode == RasterMode::amplitude) {
        amp(col, iy) = g;
      } else {
        amp(col, iy) = 1.0;
        ph(col, iy) = std::numbers::pi * g;
      }
    }
  return ObjectMask(grid, std::move(amp), std::move(ph));
}

} // namespace qiup
