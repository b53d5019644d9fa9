#pragma once
#include "qiup/imaging.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qiup {

struct NoiseModel {
  enum class Kind { none, poisson };
  Kind kind{Kind::none};
  double mean_counts{1e4}; ///< expected counts at intensity I0

  static NoiseModel none() { return {}; }
  static NoiseModel poisson(double mean_counts) { return {Kind::poisson, mean_counts}; }
};

/// Phase-stepped intensity frames of one camera grid.
struct FrameStack {
  CameraGrid grid;
  std::vector<Raster<double>> frames;
  std::vector<double> phases;
  NoiseModel noise;
  std::uint64_t seed{0};
  double i0{1.0};
};

inline constexpr std::size_t kDefaultPhaseSteps = 49;

/// n_phases frames at phi_k = 2 pi k / n. With Poisson noise each sample is
/// Poisson(mean_counts * I / I0) * I0 / mean_counts, drawn from a stream keyed
/// by (seed, frame, pixel). Throws InputError if n_phases < 3.
FrameStack synthesize_stack(const ComplexResponseMap &response, std::size_t n_phases,
                            NoiseModel noise = NoiseModel::none(), std::uint64_t seed = 0,
                            unsigned threads = 1, double i0 = 1.0);

/// I(phi) ~ offset + amplitude * cos(phi + phase).
struct SinusoidFit {
  double offset{0.0};
  double amplitude{0.0};
  double phase{0.0}; ///< in (-pi, pi]
  double residual_rms{0.0};
};

/// Unweighted linear least squares on the basis {1, cos phi, sin phi}.
/// Throws NumericError when the phase set is degenerate.
SinusoidFit fit_pixel_sinusoid(std::span<const double> samples, std::span<const double> phases);

struct ReconstructedImage {
  CameraGrid grid;
  Raster<double> offset;
  Raster<double> amplitude;
  Raster<double> phase;
  Raster<double> visibility; ///< amplitude/offset; 0 where invalid
  Raster<double> residual_rms;
  Raster<std::uint8_t> valid; ///< 0 where offset was not positive

  /// visibility * cos(phase), i.e. Re F for a noiseless stack.
  Raster<double> interference_term() const;
};

/// Per-pixel sinusoid fit over the stack.
ReconstructedImage reconstruct(const FrameStack &stack, unsigned threads = 1);

} // namespace qiup
