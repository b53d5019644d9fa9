#include "qiup/pipeline.hpp"
#include "qiup/error.hpp"

#include <algorithm>
#include <cmath>

namespace qiup {

ReconstructedImage image_object(const ObjectMask &mask, const SetupConfig &setup, const CameraGrid &grid,
                                const PipelineOptions &options) {
  const ComplexResponseMap response = compute_response(mask, setup, grid, options.threads);
  const FrameStack stack =
      synthesize_stack(response, options.n_phases, options.noise, options.seed, options.threads);
  return reconstruct(stack, options.threads);
}

Profile row_profile(const Raster<double> &image, const CameraGrid &grid, std::size_t iy) {
  if (iy >= image.ny)
    throw InputError("row_profile: row index outside the image");
  Profile p;
  p.x.resize(image.nx);
  p.v.assign(image.row(iy).begin(), image.row(iy).end());
  for (std::size_t i = 0; i < image.nx; ++i)
    p.x[i] = grid.x(i);
  return p;
}

Profile mean_row_profile(const Raster<double> &image, const CameraGrid &grid) {
  Profile p = row_profile(image, grid, 0);
  for (std::size_t iy = 1; iy < image.ny; ++iy) {
    const auto r = image.row(iy);
    for (std::size_t i = 0; i < image.nx; ++i)
      p.v[i] += r[i];
  }
  for (double &v : p.v)
    v /= static_cast<double>(image.ny);
  return p;
}

CameraGrid camera_strip(double x_lo, double x_hi, double pitch, std::size_t rows) {
  if (!(x_hi > x_lo) || !(pitch > 0.0) || rows < 1)
    throw InputError("camera_strip: empty range, non-positive pitch or no rows");
  const auto nx = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / pitch - 1e-9)) + 1;
  CameraGrid g = centered_grid<CameraGrid>(pitch, nx, rows);
  g.origin_x = 0.5 * (x_lo + x_hi) - 0.5 * static_cast<double>(nx - 1) * pitch;
  return g;
}

ObjectGrid object_grid_for(const CameraGrid &camera, const SetupConfig &setup, double pitch,
                           double extra_x, double extra_y, double x_boundary) {
  const double m = magnification(setup);
  const double margin = kKernelTruncation * object_kernel_width(setup) + 2.0 * pitch;
  const double xa = -camera.x(0) / m, xb = -camera.x(camera.nx - 1) / m;
  const double ya = -camera.y(0) / m, yb = -camera.y(camera.ny - 1) / m;
  const double x_lo = std::min({xa, xb, -extra_x}) - margin;
  const double x_hi = std::max({xa, xb, extra_x}) + margin;
  const double y_lo = std::min({ya, yb, -extra_y}) - margin;
  const double y_hi = std::max({ya, yb, extra_y}) + margin;
  return aligned_object_grid(pitch, x_lo, x_hi, y_lo, y_hi, x_boundary, 0.0);
}

namespace {

CameraGrid edge_camera(const SetupConfig &setup, const PipelineOptions &options, double half_width_sigmas) {
  const double s = sigma_camera(setup);
  return camera_strip(-half_width_sigmas * s, half_width_sigmas * s, options.camera_pitch_fraction * s,
                      options.camera_rows);
}

} // namespace

EdgeRun knife_edge_run(const SetupConfig &setup, const PipelineOptions &options, double half_width_sigmas) {
  const CameraGrid cam = edge_camera(setup, options, half_width_sigmas);
  const ObjectGrid og =
      object_grid_for(cam, setup, options.object_pitch_fraction * object_kernel_width(setup));
  const ObjectMask mask = make_knife_edge(0.0, og);
  EdgeRun run{image_object(mask, setup, cam, options), {}};
  run.profile = mean_row_profile(run.image.visibility, cam);
  return run;
}

EdgeRun phase_edge_run(const SetupConfig &setup, double delta, const PipelineOptions &options,
                       double half_width_sigmas) {
  const CameraGrid cam = edge_camera(setup, options, half_width_sigmas);
  const ObjectGrid og =
      object_grid_for(cam, setup, options.object_pitch_fraction * object_kernel_width(setup));
  const ObjectMask mask = make_phase_edge(0.0, delta, og);
  EdgeRun run{image_object(mask, setup, cam, options), {}};
  run.profile = mean_row_profile(run.image.interference_term(), cam);
  return run;
}

Profile bar_triplet_profile(const SetupConfig &setup, double line_width, const PipelineOptions &options) {
  if (!(line_width > 0.0))
    throw InputError("bar triplet: line width must be positive");
  const double so = object_kernel_width(setup);
  const double m = magnification(setup);
  // Pitch divides the line width so every bar edge is a cell boundary.
  const double cells = std::ceil(line_width / (options.object_pitch_fraction * so) - 1e-9);
  const double pitch = line_width / std::max(1.0, cells);
  const double reach = m * (2.5 * line_width + 2.0 * so);
  const CameraGrid cam = camera_strip(-reach, reach, options.camera_pitch_fraction * sigma_camera(setup), 1);
  const double extent = 2.5 * line_width + pitch;
  const ObjectGrid og = object_grid_for(cam, setup, pitch, extent, extent, 0.5 * line_width);
  const ObjectMask mask = make_bar_triplet(line_width, BarOrientation::vertical, og);
  const ReconstructedImage img = image_object(mask, setup, cam, options);
  return row_profile(img.visibility, cam, 0);
}

ReconstructedImage rectangle_image(const SetupConfig &setup, double width, double height,
                                   const PipelineOptions &options, bool full_frame) {
  const double so = object_kernel_width(setup);
  const double m = magnification(setup);
  const double pitch = options.camera_pitch_fraction * sigma_camera(setup);
  const double reach_x = m * (0.5 * width + 5.0 * so);
  CameraGrid cam = camera_strip(-reach_x, reach_x, pitch, 1);
  if (full_frame) {
    const double reach_y = m * (0.5 * height + 5.0 * so);
    const auto ny = static_cast<std::size_t>(std::ceil(2.0 * reach_y / pitch - 1e-9)) + 1;
    cam = centered_grid<CameraGrid>(pitch, cam.nx, ny);
  }
  const double op = width / std::ceil(width / (options.object_pitch_fraction * so) - 1e-9);
  const ObjectGrid og = object_grid_for(cam, setup, op, 0.5 * width + op, 0.5 * height + op, 0.5 * width);
  const ObjectMask mask = make_rectangle(width, height, og);
  return image_object(mask, setup, cam, options);
}

} // namespace qiup
