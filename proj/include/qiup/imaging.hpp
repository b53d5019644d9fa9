#pragma once
#include "qiup/grid.hpp"
#include "qiup/optics.hpp"
#include "qiup/raster.hpp"
#include "qiup/scene.hpp"

#include <complex>

namespace qiup {

/// Per-camera-pixel complex response F. |F| is the visibility image, Re F the
/// interference term of a phase object. Coordinates are physical: the image
/// is inverted (x_o = -x_c / M).
struct ComplexResponseMap {
  CameraGrid grid;
  Raster<std::complex<double>> values;
};

/// Kernel truncation half-width in units of the object-plane kernel width.
inline constexpr double kKernelTruncation = 4.0;

/// F(x_c, y_c) = integral of K(x_o + x_c/M, y_o + y_c/M) T(x_o, y_o), with K the
/// normalised separable Gaussian of 1/e half-width sigma_o truncated at
/// +-4 sigma_o. The mask is piecewise constant over its cells and each cell
/// weight is the exact Gaussian integral over it. Throws InputError when the
/// mask does not cover the kernel support of every camera pixel.
ComplexResponseMap compute_response(const ObjectMask &mask, const SetupConfig &setup,
                                    const CameraGrid &grid, unsigned threads = 1);

/// Two impulses at x_o = +-d/2: sum of Gaussians exp(-((x_c -+ M d/2)^2 + y_c^2)/sigma^2),
/// scaled so that the peak along y_c = 0 equals 1.
ComplexResponseMap response_point_pair(double d, const SetupConfig &setup, const CameraGrid &grid);

/// I = I0 * (1 + Re[exp(i phi) F]).
Raster<double> intensity_frame(const ComplexResponseMap &response, double phi, double i0 = 1.0);

/// Sampling of the q_u sum used by brute_force_response. Each camera pixel sums
/// over q_u within +-half_span/w_p of -q_d per axis with at least
/// samples_per_axis points per axis.
struct QGridSpec {
  double half_span{5.0};
  std::size_t samples_per_axis{64};
};

/// Direct evaluation of sum_{q_u} p(q_u|q_d) T(r(q_u)) per camera pixel using
/// conditional_momentum_pdf and position_from_momentum. The q_u lattice is
/// global and places object-plane samples at sub-cell midpoints of the mask.
/// Throws InputError for an under-resolved q grid or insufficient coverage.
ComplexResponseMap brute_force_response(const ObjectMask &mask, const SetupConfig &setup,
                                        const CameraGrid &grid, QGridSpec spec = {},
                                        unsigned threads = 1);

} // namespace qiup
