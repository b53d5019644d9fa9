#include "qiup/imaging.hpp"
#include "qiup/error.hpp"
#include "qiup/parallel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qiup {

namespace {

using cplx = std::complex<double>;

// Normalised weights of the truncated Gaussian centred at u over a run of
// consecutive mask cells.
struct KernelWindow {
  std::size_t first{0};
  std::vector<double> weights;
};

KernelWindow kernel_window(double u, double width, double cell_min, double pitch, std::size_t n,
                           char axis) {
  const double half = kKernelTruncation * width;
  const double lo = u - half;
  const double hi = u + half;
  const double cell_max = cell_min + static_cast<double>(n) * pitch;
  const double tol = 1e-6 * pitch;
  if (lo < cell_min - tol || hi > cell_max + tol) {
    const double left = std::max(0.0, cell_min - lo);
    const double right = std::max(0.0, hi - cell_max);
    throw InputError(fmt::format(
        "object mask does not cover the kernel support along {}: uncovered margin {:.4g} um below "
        "{:.6g} um and {:.4g} um above {:.6g} um (need +-{:.4g} um around {:.6g} um)",
        axis, left * 1e6, cell_min * 1e6, right * 1e6, cell_max * 1e6, half * 1e6, u * 1e6));
  }
  const auto first = static_cast<std::size_t>(
      std::clamp(std::floor((lo - cell_min) / pitch), 0.0, static_cast<double>(n - 1)));
  const auto last = static_cast<std::size_t>(
      std::clamp(std::floor((hi - cell_min) / pitch), 0.0, static_cast<double>(n - 1)));

  KernelWindow win;
  win.first = first;
  win.weights.resize(last - first + 1);
  double total = 0.0;
  for (std::size_t j = first; j <= last; ++j) {
    const double a = std::max(lo, cell_min + static_cast<double>(j) * pitch);
    const double b = std::min(hi, cell_min + static_cast<double>(j + 1) * pitch);
    const double w = b > a ? 0.5 * (std::erf((b - u) / width) - std::erf((a - u) / width)) : 0.0;
    win.weights[j - first] = w;
    total += w;
  }
  for (double &w : win.weights)
    w /= total;
  return win;
}

} // namespace

ComplexResponseMap compute_response(const ObjectMask &mask, const SetupConfig &setup,
                                    const CameraGrid &grid, unsigned threads) {
  grid.validate("camera grid");
  const ObjectGrid &og = mask.grid();
  const double m = magnification(setup);
  const double width = object_kernel_width(setup);

  std::vector<KernelWindow> wx(grid.nx), wy(grid.ny);
  for (std::size_t i = 0; i < grid.nx; ++i)
    wx[i] = kernel_window(-grid.x(i) / m, width, og.x_min(), og.pitch, og.nx, 'x');
  for (std::size_t l = 0; l < grid.ny; ++l)
    wy[l] = kernel_window(-grid.y(l) / m, width, og.y_min(), og.pitch, og.ny, 'y');

  std::size_t k_min = og.ny, k_max = 0;
  for (const auto &w : wy) {
    k_min = std::min(k_min, w.first);
    k_max = std::max(k_max, w.first + w.weights.size() - 1);
  }
  const std::size_t rows = k_max - k_min + 1;
  const Raster<cplx> t = mask.transmission();

  // Pass 1: convolve each needed mask row along x at the camera columns.
  Raster<cplx> partial(grid.nx, rows);
  parallel_for(rows, threads, [&](std::size_t r) {
    const auto trow = t.row(k_min + r);
    auto out = partial.row(r);
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const KernelWindow &w = wx[i];
      cplx acc{0.0, 0.0};
      for (std::size_t j = 0; j < w.weights.size(); ++j)
        acc += w.weights[j] * trow[w.first + j];
      out[i] = acc;
    }
  });

  // Pass 2: along y for each camera row.
  ComplexResponseMap result{grid, Raster<cplx>(grid.nx, grid.ny)};
  parallel_for(grid.ny, threads, [&](std::size_t l) {
    const KernelWindow &w = wy[l];
    auto out = result.values.row(l);
    for (std::size_t i = 0; i < grid.nx; ++i) {
      cplx acc{0.0, 0.0};
      for (std::size_t k = 0; k < w.weights.size(); ++k)
        acc += w.weights[k] * partial(i, w.first + k - k_min);
      out[i] = acc;
    }
  });
  return result;
}

ComplexResponseMap response_point_pair(double d, const SetupConfig &setup, const CameraGrid &grid) {
  if (!(d > 0.0))
    throw InputError("point pair: separation must be positive");
  grid.validate("camera grid");
  const double a = 0.5 * magnification(setup) * d;
  const double s = sigma_camera(setup);
  const auto g = [a, s](double x) {
    return std::exp(-(x - a) * (x - a) / (s * s)) + std::exp(-(x + a) * (x + a) / (s * s));
  };

  // g is even and unimodal on [0, a]; golden-section search for its maximum.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = a;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (a + s); ++it) {
    const double x1 = hi - phi * (hi - lo);
    const double x2 = lo + phi * (hi - lo);
    if (g(x1) < g(x2))
      lo = x1;
    else
      hi = x2;
  }
  const double peak = std::max({g(0.5 * (lo + hi)), g(0.0), g(a)});

  ComplexResponseMap result{grid, Raster<cplx>(grid.nx, grid.ny)};
  for (std::size_t l = 0; l < grid.ny; ++l) {
    const double y = grid.y(l);
    const double gy = std::exp(-y * y / (s * s));
    for (std::size_t i = 0; i < grid.nx; ++i)
      result.values(i, l) = g(grid.x(i)) * gy / peak;
  }
  return result;
}

Raster<double> intensity_frame(const ComplexResponseMap &response, double phi, double i0) {
  const cplx rot = std::polar(1.0, phi);
  Raster<double> frame(response.values.nx, response.values.ny);
  for (std::size_t i = 0; i < frame.size(); ++i)
    frame.data[i] = std::max(0.0, i0 * (1.0 + (rot * response.values.data[i]).real()));
  return frame;
}

ComplexResponseMap brute_force_response(const ObjectMask &mask, const SetupConfig &setup,
                                        const CameraGrid &grid, QGridSpec spec, unsigned threads) {
  grid.validate("camera grid");
  if (!(spec.half_span >= 5.0) || spec.samples_per_axis < 64)
    throw InputError(fmt::format(
        "under-resolved q grid: need half-span >= 5/w_p and >= 64 samples per axis, got {}/w_p and {}",
        spec.half_span, spec.samples_per_axis));

  const ObjectGrid &og = mask.grid();
  // Wave-vector spacing of one metre in the object plane.
  const double q_per_m = momentum_from_position({Plane::object, 1.0, 0.0}, setup).qx;
  const double span_q = spec.half_span / setup.w_p();
  const double span_obj = span_q / q_per_m;
  const auto sub = static_cast<std::size_t>(std::max(
      1.0, std::ceil(og.pitch * static_cast<double>(spec.samples_per_axis) / (2.0 * span_obj))));
  const double dq = og.pitch / static_cast<double>(sub) * q_per_m;
  const double qx0 = (og.x_min() + 0.5 * og.pitch / static_cast<double>(sub)) * q_per_m;
  const double qy0 = (og.y_min() + 0.5 * og.pitch / static_cast<double>(sub)) * q_per_m;
  const std::size_t mx = og.nx * sub, my = og.ny * sub;

  const Raster<cplx> t = mask.transmission();
  ComplexResponseMap result{grid, Raster<cplx>(grid.nx, grid.ny)};

  const auto index_range = [&](double centre, double q0, std::size_t n, char axis) {
    const double lo = std::ceil((centre - span_q - q0) / dq - 1e-9);
    const double hi = std::floor((centre + span_q - q0) / dq + 1e-9);
    if (lo < 0.0 || hi > static_cast<double>(n - 1))
      throw InputError(fmt::format(
          "object mask does not cover the q_u window along {} (lattice index range [{}, {}] vs [0, {}])",
          axis, lo, hi, n - 1));
    return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
  };

  parallel_for(grid.size(), threads, [&](std::size_t pix) {
    const std::size_t i = pix % grid.nx, l = pix / grid.nx;
    const MomentumVector q_d = momentum_from_position({Plane::camera, grid.x(i), grid.y(l)}, setup);
    const auto [ax, bx] = index_range(-q_d.qx, qx0, mx, 'x');
    const auto [ay, by] = index_range(-q_d.qy, qy0, my, 'y');
    cplx acc{0.0, 0.0};
    double norm = 0.0;
    for (std::size_t b = ay; b <= by; ++b) {
      for (std::size_t a = ax; a <= bx; ++a) {
        const MomentumVector q_u{qx0 + static_cast<double>(a) * dq, qy0 + static_cast<double>(b) * dq};
        const double p = conditional_momentum_pdf(q_d, q_u, setup);
        const PlanePoint r = position_from_momentum(q_u, Plane::object, setup);
        const auto cx = static_cast<std::size_t>(std::clamp(
            std::floor((r.x - og.x_min()) / og.pitch), 0.0, static_cast<double>(og.nx - 1)));
        const auto cy = static_cast<std::size_t>(std::clamp(
            std::floor((r.y - og.y_min()) / og.pitch), 0.0, static_cast<double>(og.ny - 1)));
        acc += p * t(cx, cy);
        norm += p;
      }
    }
    result.values(i, l) = acc / norm;
  });
  return result;
}

} // namespace qiup
