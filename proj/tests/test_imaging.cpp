#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qiup/error.hpp"
#include "qiup/imaging.hpp"
#include "qiup/pipeline.hpp"

#include <cmath>
#include <numbers>

using namespace qiup;

namespace {

constexpr double pi = std::numbers::pi;

struct Geometry {
  SetupConfig setup;
  double m, so, sc;
  explicit Geometry(SetupConfig s)
      : setup(s), m(magnification(s)), so(object_kernel_width(s)), sc(sigma_camera(s)) {}
};

/// Fraction of exp(-(x - c)^2/s^2) lying in [a, b].
double gauss_fraction(double a, double b, double c, double s) {
  return 0.5 * (std::erf((b - c) / s) - std::erf((a - c) / s));
}

double max_abs_diff(const ComplexResponseMap &a, const ComplexResponseMap &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    worst = std::max(worst, std::abs(a.values.data[i] - b.values.data[i]));
  return worst;
}

} // namespace

TEST_CASE("open aperture gives unit response") {
  const Geometry g(setup_one(300e-6));
  const CameraGrid cam = centered_grid<CameraGrid>(g.sc / 3, 9, 7);
  const ObjectGrid og = object_grid_for(cam, g.setup, g.so / 8);
  const ObjectMask open(og, Raster<double>(og.nx, og.ny, 1.0), Raster<double>(og.nx, og.ny, 0.0));
  const ComplexResponseMap f = compute_response(open, g.setup, cam);
  for (const auto &v : f.values.data)
    CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("knife edge follows the erf law with the image inverted") {
  for (const SetupConfig &s : {setup_one(148e-6), setup_two(300e-6)}) {
    const Geometry g(s);
    for (double x0 : {0.0, 0.75 * g.so}) {
      const CameraGrid cam = camera_strip(-5 * g.sc, 5 * g.sc, g.sc / 10, 2);
      const ObjectGrid og = object_grid_for(cam, s, g.so / 8, std::abs(x0), 0.0, x0);
      const ComplexResponseMap f = compute_response(make_knife_edge(x0, og), s, cam);
      for (std::size_t iy = 0; iy < cam.ny; ++iy)
        for (std::size_t ix = 0; ix < cam.nx; ++ix) {
          const double oracle = 0.5 * std::erfc((cam.x(ix) + g.m * x0) / g.sc);
          CHECK(std::abs(f.values(ix, iy) - oracle) < 1e-6);
        }
    }
  }
}

TEST_CASE("rectangle is a separable product of erf differences") {
  const Geometry g(setup_two(201e-6));
  const double a = 1.5 * g.so, b = 0.75 * g.so; // half width, half height
  const double pitch = b / 6; // puts every rectangle edge on a cell boundary
  const CameraGrid cam = centered_grid<CameraGrid>(g.sc / 2, 15, 11);
  const ObjectGrid og = object_grid_for(cam, g.setup, pitch, a, b, a);
  const ComplexResponseMap f = compute_response(make_rectangle(2 * a, 2 * b, og), g.setup, cam);
  for (std::size_t iy = 0; iy < cam.ny; ++iy)
    for (std::size_t ix = 0; ix < cam.nx; ++ix) {
      const double oracle = gauss_fraction(-a, a, -cam.x(ix) / g.m, g.so) * gauss_fraction(-b, b, -cam.y(iy) / g.m, g.so);
      CHECK(std::abs(f.values(ix, iy) - oracle) < 1e-6);
    }
}

TEST_CASE("phase edge mixes the two halves with the step phase") {
  const Geometry g(setup_one(300e-6));
  const double delta = 2.0;
  const CameraGrid cam = camera_strip(-4 * g.sc, 4 * g.sc, g.sc / 6, 1);
  const ObjectGrid og = object_grid_for(cam, g.setup, g.so / 8);
  const ComplexResponseMap f = compute_response(make_phase_edge(0.0, delta, og), g.setup, cam);
  for (std::size_t ix = 0; ix < cam.nx; ++ix) {
    const double right = 0.5 * std::erfc(cam.x(ix) / g.sc);
    const std::complex<double> oracle = (1.0 - right) + right * std::polar(1.0, delta);
    CHECK(std::abs(f.values(ix, 0) - oracle) < 1e-6);
  }
}

TEST_CASE("linearity in the transmission") {
  const Geometry g(setup_one(201e-6));
  const CameraGrid cam = centered_grid<CameraGrid>(g.sc / 2, 11, 9);
  const ObjectGrid og = object_grid_for(cam, g.setup, g.so / 6);
  const ObjectMask a = make_knife_edge(0.0, og);
  const ObjectMask b = make_phase_edge(0.3 * g.so, 1.0, og);
  Raster<std::complex<double>> mix(og.nx, og.ny);
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix.data[i] = 0.25 * a.transmission().data[i] + 0.5 * std::complex<double>(0, 1) * b.transmission().data[i];
  const ComplexResponseMap fa = compute_response(a, g.setup, cam);
  const ComplexResponseMap fb = compute_response(b, g.setup, cam);
  const ComplexResponseMap fm = compute_response(ObjectMask::from_complex(og, mix), g.setup, cam);
  for (std::size_t i = 0; i < fm.values.size(); ++i)
    CHECK(std::abs(fm.values.data[i] - (0.25 * fa.values.data[i] +
                                        0.5 * std::complex<double>(0, 1) * fb.values.data[i])) < 1e-13);
}

TEST_CASE("shifting the object shifts the image by -M times the shift") {
  const Geometry g(setup_two(148e-6));
  const double op = g.so / 8;
  const int k = 5;
  // Camera pitch M*op makes an object shift of k cells an image shift of k pixels.
  const CameraGrid cam = camera_strip(-4 * g.sc, 4 * g.sc, g.m * op, 1);
  const ObjectGrid og = object_grid_for(cam, g.setup, op, k * op);
  const ComplexResponseMap f0 = compute_response(make_knife_edge(0.0, og), g.setup, cam);
  const ComplexResponseMap fk = compute_response(make_knife_edge(k * op, og), g.setup, cam);
  for (std::size_t ix = k; ix < cam.nx; ++ix)
    CHECK(std::abs(fk.values(ix - k, 0) - f0.values(ix, 0)) < 1e-12);
}

TEST_CASE("insufficient mask coverage is rejected") {
  const Geometry g(setup_one(300e-6));
  const CameraGrid cam = centered_grid<CameraGrid>(g.sc / 2, 11, 3);
  const ObjectGrid small = centered_grid<ObjectGrid>(g.so / 8, 20, 20);
  try {
    compute_response(make_knife_edge(0.0, small), g.setup, cam);
    FAIL("expected coverage error");
  } catch (const InputError &e) {
    CHECK(std::string(e.what()).find("cover") != std::string::npos);
  }
}

TEST_CASE("thread count does not change the response") {
  const Geometry g(setup_one(201e-6));
  const CameraGrid cam = centered_grid<CameraGrid>(g.sc / 3, 17, 13);
  const ObjectMask bars = make_bar_triplet(150e-6, BarOrientation::horizontal,
                                           object_grid_for(cam, g.setup, g.so / 8, 400e-6, 400e-6));
  const ComplexResponseMap one = compute_response(bars, g.setup, cam, 1);
  const ComplexResponseMap four = compute_response(bars, g.setup, cam, 4);
  CHECK(one.values.data == four.values.data);
}

TEST_CASE("point pair response") {
  const Geometry g(setup_one(300e-6));
  const double d = 180e-6;
  const CameraGrid cam = camera_strip(-3 * g.m * d, 3 * g.m * d, g.sc / 50, 3);
  const ComplexResponseMap f = response_point_pair(d, g.setup, cam);
  const auto raw = [&](double x, double y) {
    const double h = 0.5 * g.m * d;
    return std::exp(-((x - h) * (x - h) + y * y) / (g.sc * g.sc)) +
           std::exp(-((x + h) * (x + h) + y * y) / (g.sc * g.sc));
  };
  double peak = 0.0;
  for (int i = 0; i <= 200000; ++i)
    peak = std::max(peak, raw(g.m * d * i / 200000.0, 0.0));
  for (std::size_t iy = 0; iy < cam.ny; ++iy)
    for (std::size_t ix = 0; ix < cam.nx; ++ix) {
      CHECK(std::abs(f.values(ix, iy) - raw(cam.x(ix), cam.y(iy)) / peak) < 1e-9);
      CHECK(f.values(ix, iy).imag() == 0.0);
    }
  double top = 0.0;
  for (std::size_t ix = 0; ix < cam.nx; ++ix)
    top = std::max(top, f.values(ix, 1).real());
  CHECK(top == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(response_point_pair(-1.0, g.setup, cam), InputError);
}

TEST_CASE("intensity frame") {
  ComplexResponseMap f;
  f.grid = centered_grid<CameraGrid>(1e-6, 2, 1);
  f.values = Raster<std::complex<double>>(2, 1);
  f.values(0, 0) = std::polar(0.5, 0.3);
  f.values(1, 0) = std::polar(1.0, 0.0);
  const Raster<double> i = intensity_frame(f, 1.1, 2.0);
  CHECK(i(0, 0) == doctest::Approx(2.0 * (1 + 0.5 * std::cos(1.1 + 0.3))));
  CHECK(intensity_frame(f, pi)(1, 0) == doctest::Approx(0.0));
  CHECK(intensity_frame(f, pi)(1, 0) >= 0.0);
}

TEST_CASE("direct momentum sum agrees with the convolution") {
  const Geometry g(setup_two(201e-6));
  const CameraGrid cam = centered_grid<CameraGrid>(g.sc / 2, 8, 8);
  const ObjectGrid og = object_grid_for(cam, g.setup, g.so / 8);
  const ObjectMask mask = make_phase_edge(0.0, 1.3, og);
  const ComplexResponseMap fast = compute_response(mask, g.setup, cam);
  const ComplexResponseMap slow = brute_force_response(mask, g.setup, cam);
  CHECK(max_abs_diff(fast, slow) < 1e-3);

  CHECK_THROWS_AS(brute_force_response(mask, g.setup, cam, QGridSpec{3.0, 64}), InputError);
  CHECK_THROWS_AS(brute_force_response(mask, g.setup, cam, QGridSpec{5.0, 16}), InputError);
}
