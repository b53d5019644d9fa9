#pragma once
#include "qiup/grid.hpp"
#include "qiup/raster.hpp"

#include <complex>
#include <filesystem>

namespace qiup {

/// Complex transmission T = |T| exp(i theta) sampled on an object grid.
/// Invariants: 0 <= |T| <= 1 and theta in (-pi, pi] at every sample.
class ObjectMask {
public:
  ObjectMask(ObjectGrid grid, Raster<double> amplitude, Raster<double> phase);

  /// Builds a mask from complex samples; |z| must not exceed 1.
  static ObjectMask from_complex(const ObjectGrid &grid, const Raster<std::complex<double>> &t);

  const ObjectGrid &grid() const { return grid_; }
  const Raster<double> &amplitude() const { return amplitude_; }
  const Raster<double> &phase() const { return phase_; }

  std::complex<double> transmission(std::size_t ix, std::size_t iy) const {
    return std::polar(amplitude_(ix, iy), phase_(ix, iy));
  }
  Raster<std::complex<double>> transmission() const;

private:
  ObjectGrid grid_;
  Raster<double> amplitude_;
  Raster<double> phase_;
};

enum class BarOrientation { vertical, horizontal };

/// One element of the 1951 USAF chart: three bars of width w, gaps w, length 5w.
struct UsafTriplet {
  int group{1};
  int element{1}; ///< 1..6
  BarOrientation orientation{BarOrientation::vertical};

  /// Line width 500 / 2^(group + (element-1)/6) micrometres, returned in metres.
  double line_width() const;
};

/// Wraps an angle into (-pi, pi].
double wrap_phase(double theta);

/// Opaque for x_o < x0, transparent otherwise. A cell cut by the edge carries
/// its transparent area fraction.
ObjectMask make_knife_edge(double x0, const ObjectGrid &grid);

/// Two unit impulses at (+-d/2, 0), each on the nearest sample.
ObjectMask make_point_pair(double d, const ObjectGrid &grid);

/// Three transparent bars, the middle one centred on the origin, on an opaque
/// background. Throws InputError if the triplet does not fit in the grid.
ObjectMask make_usaf_triplet(const UsafTriplet &spec, const ObjectGrid &grid);

/// Same geometry as make_usaf_triplet with a continuous line width [m].
ObjectMask make_bar_triplet(double line_width, BarOrientation orientation, const ObjectGrid &grid);

/// Transparent rectangle of the given full width and height centred on the origin.
ObjectMask make_rectangle(double width, double height, const ObjectGrid &grid);

/// Unit amplitude; phase 0 for x_o < x0 and `delta` otherwise.
ObjectMask make_phase_edge(double x0, double delta, const ObjectGrid &grid);

enum class RasterMode { amplitude, phase };

/// Loads a binary grey map centred on the origin with pitch physical_width/nx.
/// Amplitude mode maps grey g in [0, maxval] to |T| = g/maxval; phase mode
/// keeps |T| = 1 and sets theta = pi * g/maxval.
ObjectMask load_raster(const std::filesystem::path &path, double physical_width,
                       RasterMode mode = RasterMode::amplitude);

} // namespace qiup
