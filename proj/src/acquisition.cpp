#include "qiup/acquisition.hpp"
#include "qiup/error.hpp"
#include "qiup/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace qiup {


namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel) {
  return splitmix64(splitmix64(splitmix64(seed) ^ frame) ^ pixel);
}

// Least-squares projector for a fixed phase set: coefficients of {1, cos, sin}.
class SinusoidSolver {
public:
  explicit SinusoidSolver(std::span<const double> phases) : design_(phases.size(), 3) {
    if (phases.size() < 3)
      throw InputError(fmt::format("sinusoid fit needs at least 3 samples, got {}", phases.size()));
    for (std::size_t k = 0; k < phases.size(); ++k) {
      design_(k, 0) = 1.0;
      design_(k, 1) = std::cos(phases[k]);
      design_(k, 2) = std::sin(phases[k]);
    }
    const Eigen::Matrix3d normal = design_.transpose() * design_;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal);
    const auto ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 1e-10 * ev.maxCoeff()))
      throw NumericError("sinusoid fit: degenerate phase set (singular normal equations)");
    projector_ = normal.ldlt().solve(design_.transpose());
  }

  SinusoidFit fit(std::span<const double> samples) const {
    if (static_cast<Eigen::Index>(samples.size()) != design_.rows())
      throw InputError("sinusoid fit: samples and phases differ in length");
    const Eigen::Map<const Eigen::VectorXd> y(samples.data(), static_cast<Eigen::Index>(samples.size()));
    const Eigen::Vector3d c = projector_ * y;
    SinusoidFit f;
    f.offset = c(0);
    f.amplitude = std::hypot(c(1), c(2));
    f.phase = wrap_phase(std::atan2(-c(2), c(1)));
    f.residual_rms = std::sqrt((y - design_ * c).squaredNorm() / static_cast<double>(samples.size()));
    return f;
  }

private:
  Eigen::MatrixXd design_;
  Eigen::Matrix<double, 3, Eigen::Dynamic> projector_;
};

} // namespace

FrameStack synthesize_stack(const ComplexResponseMap &response, std::size_t n_phases, NoiseModel noise,
                            std::uint64_t seed, unsigned threads, double i0) {
  if (n_phases < 3)
    throw InputError(fmt::format("phase stepping needs at least 3 phases, got {}", n_phases));
  if (noise.kind == NoiseModel::Kind::poisson && !(noise.mean_counts > 0.0))
    throw InputError("Poisson noise needs positive mean counts");
  if (!(i0 > 0.0))
    throw InputError("I0 must be positive");

  FrameStack stack;
  stack.grid = response.grid;
  stack.noise = noise;
  stack.seed = seed;
  stack.i0 = i0;
  for (std::size_t k = 0; k < n_phases; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_phases);
    stack.phases.push_back(phi);
    stack.frames.push_back(intensity_frame(response, phi, i0));
  }
  if (noise.kind == NoiseModel::Kind::poisson) {
    const double to_counts = noise.mean_counts / i0;
    for (std::size_t k = 0; k < n_phases; ++k) {
      auto &frame = stack.frames[k];
      parallel_for(frame.size(), threads, [&](std::size_t pix) {
        std::mt19937_64 rng(stream_key(seed, k, pix));
        const double mean = frame.data[pix] * to_counts;
        double counts = 0.0;
        if (mean > 0.0) {
          std::poisson_distribution<long long> draw(mean);
          counts = static_cast<double>(draw(rng));
        }
        frame.data[pix] = counts / to_counts;
      });
    }
  }
  return stack;
}

SinusoidFit fit_pixel_sinusoid(std::span<const double> samples, std::span<const double> phases) {
  if (samples.size() != phases.size())
    throw InputError("sinusoid fit: samples and phases differ in length");
  return SinusoidSolver(phases).fit(samples);
}

Raster<double> ReconstructedImage::interference_term() const {
  Raster<double> out(visibility.nx, visibility.ny);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data[i] = visibility.data[i] * std::cos(phase.data[i]);
  return out;
}

ReconstructedImage reconstruct(const FrameStack &stack, unsigned threads) {
  if (stack.frames.size() != stack.phases.size() || stack.frames.size() < 3)
    throw InputError("frame stack: need at least 3 frames with one phase each");
  const SinusoidSolver solver(stack.phases);
  const std::size_t nx = stack.grid.nx, ny = stack.grid.ny;
  for (const auto &f : stack.frames)
    if (f.nx != nx || f.ny != ny)
      throw InputError("frame stack: frame size does not match the grid");

  ReconstructedImage img;
  img.grid = stack.grid;
  img.offset = Raster<double>(nx, ny);
  img.amplitude = Raster<double>(nx, ny);
  img.phase = Raster<double>(nx, ny);
  img.visibility = Raster<double>(nx, ny);
  img.residual_rms = Raster<double>(nx, ny);
  img.valid = Raster<std::uint8_t>(nx, ny);

  const double floor = 10.0 * std::numeric_limits<double>::epsilon();
  parallel_for(nx * ny, threads, [&](std::size_t pix) {
    std::vector<double> samples(stack.frames.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
      samples[k] = stack.frames[k].data[pix];
    const SinusoidFit f = solver.fit(samples);
    img.offset.data[pix] = f.offset;
    img.amplitude.data[pix] = f.amplitude;
    img.phase.data[pix] = f.phase;
    img.residual_rms.data[pix] = f.residual_rms;
    const bool ok = f.offset > floor;
    img.valid.data[pix] = ok ? 1 : 0;
    img.visibility.data[pix] = ok ? f.amplitude / f.offset : 0.0;
  });
  return img;
}

} // namespace qiup
