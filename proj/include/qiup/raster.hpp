#pragma once
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace qiup {

/// Row-major 2-D sample array. Row iy holds samples (0..nx-1, iy).
template <class T>
struct Raster {
  std::size_t nx{0};
  std::size_t ny{0};
  std::vector<T> data;

  Raster() = default;
  Raster(std::size_t nx_, std::size_t ny_, T fill = T{})
      : nx(nx_), ny(ny_), data(nx_ * ny_, fill) {}

  T &operator()(std::size_t ix, std::size_t iy) {
    assert(ix < nx && iy < ny);
    return data[iy * nx + ix];
  }
  const T &operator()(std::size_t ix, std::size_t iy) const {
    assert(ix < nx && iy < ny);
    return data[iy * nx + ix];
  }

  std::span<T> row(std::size_t iy) { return {data.data() + iy * nx, nx}; }
  std::span<const T> row(std::size_t iy) const { return {data.data() + iy * nx, nx}; }

  std::size_t size() const { return data.size(); }
};

} // namespace qiup
