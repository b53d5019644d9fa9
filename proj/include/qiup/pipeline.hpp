#pragma once
#include "qiup/acquisition.hpp"
#include "qiup/imaging.hpp"
#include "qiup/optics.hpp"
#include "qiup/scene.hpp"

#include <cstdint>
#include <vector>

namespace qiup {

/// Sampled 1-D cross-section: coordinate [m] and value.
struct Profile {
  std::vector<double> x;
  std::vector<double> v;
};

/// Settings shared by every object -> frames -> reconstruction run.
struct PipelineOptions {
  std::size_t n_phases{kDefaultPhaseSteps};
  NoiseModel noise{};
  std::uint64_t seed{0};
  unsigned threads{1};
  double object_pitch_fraction{1.0 / 8.0}; ///< object pitch = fraction * sigma_o
  double camera_pitch_fraction{1.0 / 20.0}; ///< camera pitch = fraction * sigma
  std::size_t camera_rows{1};               ///< rows averaged into cross-sections
};

/// Full simulated acquisition of a mask: response, phase-stepped stack, per-pixel fit.
ReconstructedImage image_object(const ObjectMask &mask, const SetupConfig &setup,
                                const CameraGrid &grid, const PipelineOptions &options);

/// Row iy of an image as a profile along x_c.
Profile row_profile(const Raster<double> &image, const CameraGrid &grid, std::size_t iy);

/// Mean over all rows.
Profile mean_row_profile(const Raster<double> &image, const CameraGrid &grid);

/// Camera grid of `rows` rows centred on y_c = 0 spanning x_c in [x_lo, x_hi].
CameraGrid camera_strip(double x_lo, double x_hi, double pitch, std::size_t rows);

/// Object grid covering the kernel support of every camera pixel and the box
/// |x_o| <= extra_x, |y_o| <= extra_y, with a cell boundary on x_o = x_boundary
/// and on y_o = 0.
ObjectGrid object_grid_for(const CameraGrid &camera, const SetupConfig &setup, double pitch,
                           double extra_x = 0.0, double extra_y = 0.0, double x_boundary = 0.0);

struct EdgeRun {
  ReconstructedImage image;
  Profile profile; ///< visibility (amplitude edge) or Re F (phase edge), rows averaged
};

/// Knife edge at x_o = 0 imaged over x_c in +-half_width_sigmas * sigma.
EdgeRun knife_edge_run(const SetupConfig &setup, const PipelineOptions &options,
                       double half_width_sigmas = 5.0);

/// Phase step of `delta` at x_o = 0; the profile is the interference term.
EdgeRun phase_edge_run(const SetupConfig &setup, double delta, const PipelineOptions &options,
                       double half_width_sigmas = 5.0);

/// Visibility cross-section through the centres of a vertical bar triplet of
/// the given line width.
Profile bar_triplet_profile(const SetupConfig &setup, double line_width,
                            const PipelineOptions &options);

/// Image of a transparent width x height rectangle. The camera field spans the
/// magnified rectangle plus 5 sigma margins; a single row through the centre
/// unless full_frame is set.
ReconstructedImage rectangle_image(const SetupConfig &setup, double width, double height,
                                   const PipelineOptions &options, bool full_frame = false);

} // namespace qiup
