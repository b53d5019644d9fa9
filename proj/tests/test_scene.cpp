#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qiup/error.hpp"
#include "qiup/greymap.hpp"
#include "qiup/scene.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

using namespace qiup;

namespace {

constexpr double pi = std::numbers::pi;

double transmitted_area(const ObjectMask &m) {
  const double p = m.grid().pitch;
  return std::accumulate(m.amplitude().data.begin(), m.amplitude().data.end(), 0.0) * p * p;
}

std::filesystem::path temp_path(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("qiup_test_scene_" + name);
}

} // namespace

TEST_CASE("USAF line widths") {
  CHECK(UsafTriplet{1, 1}.line_width() == doctest::Approx(250e-6).epsilon(1e-14));
  CHECK(UsafTriplet{0, 1}.line_width() == doctest::Approx(500e-6).epsilon(1e-14));
  CHECK(UsafTriplet{2, 3}.line_width() == doctest::Approx(500e-6 / std::pow(2.0, 2.0 + 2.0 / 6.0)).epsilon(1e-14));
  CHECK(UsafTriplet{1, 4}.line_width() == doctest::Approx(176.78e-6).epsilon(1e-4));
  CHECK_THROWS_AS(UsafTriplet({1, 7}).line_width(), InputError);
  CHECK_THROWS_AS(UsafTriplet({1, 0}).line_width(), InputError);
}

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(pi) == doctest::Approx(pi));
  CHECK(wrap_phase(-pi) == doctest::Approx(pi));
  CHECK(wrap_phase(3 * pi) == doctest::Approx(pi));
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(2 * pi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_phase(-0.25) == doctest::Approx(-0.25));
}

TEST_CASE("mask invariants") {
  const ObjectGrid g = centered_grid<ObjectGrid>(1e-6, 4, 3);
  CHECK_THROWS_AS(ObjectMask(g, Raster<double>(4, 3, 1.5), Raster<double>(4, 3)), InputError);
  CHECK_THROWS_AS(ObjectMask(g, Raster<double>(4, 3, -0.1), Raster<double>(4, 3)), InputError);
  CHECK_THROWS_AS(ObjectMask(g, Raster<double>(4, 3, 1.0), Raster<double>(4, 3, std::nan(""))), InputError);
  CHECK_THROWS_AS(ObjectMask(g, Raster<double>(3, 3, 1.0), Raster<double>(4, 3)), InputError);

  const ObjectMask m(g, Raster<double>(4, 3, 0.5), Raster<double>(4, 3, 3 * pi));
  CHECK(m.phase()(0, 0) == doctest::Approx(pi));

  Raster<std::complex<double>> t(4, 3, std::polar(0.8, 1.2));
  const ObjectMask c = ObjectMask::from_complex(g, t);
  CHECK(std::abs(c.transmission(2, 1) - t(2, 1)) < 1e-15);
  t(0, 0) = {1.0, 1.0};
  CHECK_THROWS_AS(ObjectMask::from_complex(g, t), InputError);
}

TEST_CASE("knife edge") {
  const double p = 1e-6;
  const ObjectGrid g = centered_grid<ObjectGrid>(p, 10, 2); // cell edges at integer microns
  const ObjectMask on = make_knife_edge(0.0, g);
  for (std::size_t ix = 0; ix < g.nx; ++ix)
    CHECK(on.amplitude()(ix, 1) == (g.x(ix) > 0 ? 1.0 : 0.0));

  // Edge a quarter into the cell spanning [0, 1] um leaves 3/4 transparent.
  const ObjectMask cut = make_knife_edge(0.25e-6, g);
  CHECK(cut.amplitude()(5, 0) == doctest::Approx(0.75));
  CHECK(cut.amplitude()(4, 0) == 0.0);
  CHECK(cut.amplitude()(6, 0) == 1.0);
  CHECK_THROWS_AS(make_knife_edge(20e-6, g), InputError);
}

TEST_CASE("bar triplet and rectangle areas") {
  const double w = 10e-6;
  const ObjectGrid g = aligned_object_grid(w / 4, -40e-6, 40e-6, -40e-6, 40e-6, 0.5 * w, 0.0);
  const ObjectMask bars = make_bar_triplet(w, BarOrientation::vertical, g);
  CHECK(transmitted_area(bars) == doctest::Approx(3 * w * 5 * w).epsilon(1e-12));
  // Middle bar and gaps on the centre row.
  const auto iy = static_cast<std::size_t>(std::lround((0.5 * g.pitch - g.origin_y) / g.pitch));
  const auto at = [&](double x) {
    return bars.amplitude()(static_cast<std::size_t>(std::round((x - g.origin_x) / g.pitch)), iy);
  };
  CHECK(at(0.1 * w) == doctest::Approx(1.0));
  CHECK(at(1.0 * w) == 0.0);
  CHECK(at(2.0 * w) == doctest::Approx(1.0));
  CHECK(at(3.0 * w) == 0.0);

  const ObjectMask horizontal = make_bar_triplet(w, BarOrientation::horizontal, g);
  CHECK(transmitted_area(horizontal) == doctest::Approx(3 * w * 5 * w).epsilon(1e-12));

  const ObjectMask usaf = make_usaf_triplet({5, 1}, g); // 15.625 um lines
  CHECK(transmitted_area(usaf) > 0);
  CHECK_THROWS_AS(make_usaf_triplet({4, 1}, g), InputError);

  // Off-grid rectangle edges still integrate to the exact area.
  const ObjectMask r = make_rectangle(13.3e-6, 7.1e-6, g);
  CHECK(transmitted_area(r) == doctest::Approx(13.3e-6 * 7.1e-6).epsilon(1e-12));
  CHECK_THROWS_AS(make_rectangle(100e-6, 1e-6, g), InputError);
}

TEST_CASE("phase edge") {
  const ObjectGrid g = centered_grid<ObjectGrid>(1e-6, 10, 1);
  const ObjectMask m = make_phase_edge(0.0, pi, g);
  for (std::size_t ix = 0; ix < g.nx; ++ix) {
    CHECK(m.amplitude()(ix, 0) == 1.0);
    CHECK(m.phase()(ix, 0) == doctest::Approx(g.x(ix) > 0 ? pi : 0.0));
  }
  const ObjectMask flat = make_phase_edge(0.0, 0.0, g);
  for (double t : flat.phase().data)
    CHECK(t == 0.0);
}

TEST_CASE("point pair") {
  const ObjectGrid g = centered_grid<ObjectGrid>(1e-6, 41, 5);
  const ObjectMask m = make_point_pair(10e-6, g);
  CHECK(transmitted_area(m) == doctest::Approx(2e-12));
  CHECK(m.amplitude()(15, 2) == 1.0);
  CHECK(m.amplitude()(25, 2) == 1.0);
  CHECK_THROWS_AS(make_point_pair(1.5e-6, g), InputError);
  CHECK_THROWS_AS(make_point_pair(60e-6, g), InputError);
}

TEST_CASE("raster loading") {
  GreyMap map;
  map.width = 3;
  map.height = 2;
  map.maxval = 65535;
  map.samples = {0, 32768, 65535, 65535, 0, 0};
  const auto path = temp_path("raster.pgm");
  write_greymap16(path, map);

  const ObjectMask a = load_raster(path, 3e-3, RasterMode::amplitude);
  CHECK(a.grid().pitch == doctest::Approx(1e-3));
  CHECK(a.grid().nx == 3);
  CHECK(a.grid().ny == 2);
  // File row 0 is the top of the object (largest y).
  CHECK(a.amplitude()(0, 1) == 0.0);
  CHECK(a.amplitude()(1, 1) == doctest::Approx(32768.0 / 65535.0));
  CHECK(a.amplitude()(2, 1) == 1.0);
  CHECK(a.amplitude()(0, 0) == 1.0);
  CHECK(a.grid().y(1) > a.grid().y(0));

  const ObjectMask ph = load_raster(path, 3e-3, RasterMode::phase);
  CHECK(ph.amplitude()(1, 1) == 1.0);
  CHECK(ph.phase()(1, 1) == doctest::Approx(pi * 32768.0 / 65535.0));
  CHECK(ph.phase()(2, 1) == doctest::Approx(pi));

  CHECK_THROWS_AS(load_raster(path, 0.0), InputError);
  CHECK_THROWS_AS(load_raster(temp_path("missing.pgm"), 1e-3), InputError);
  std::filesystem::remove(path);
}
