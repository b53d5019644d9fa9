#pragma once
#include "qiup/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qiup {

/// Decoded binary portable grey map (P5). Row 0 is the top row of the file.
struct GreyMap {
  std::size_t width{0};
  std::size_t height{0};
  unsigned maxval{255};
  std::vector<std::uint16_t> samples; ///< row-major, width*height
};

/// Reads an 8- or 16-bit P5 file. Throws InputError quoting the header bytes
/// when the file is not a valid grey map.
GreyMap read_greymap(const std::filesystem::path &path);

/// Writes a 16-bit (maxval 65535, big-endian) P5 file with optional header
/// comment lines.
void write_greymap16(const std::filesystem::path &path, const GreyMap &map,
                     const std::vector<std::string> &comments = {});

struct Normalization {
  enum class Mode { fixed_range, per_image };
  Mode mode{Mode::fixed_range};
  double lo{0.0};
  double hi{1.0};

  static Normalization fixed(double lo, double hi) { return {Mode::fixed_range, lo, hi}; }
  static Normalization per_image() { return {Mode::per_image, 0.0, 1.0}; }
};

/// Quantises a real image to 16 bits. Raster row iy becomes file row
/// (ny-1-iy) so that +y points up in the picture. Values outside the range
/// are clamped. Returns the range actually used.
GreyMap quantize(const Raster<double> &image, Normalization norm, double *used_lo = nullptr,
                 double *used_hi = nullptr);

} // namespace qiup
