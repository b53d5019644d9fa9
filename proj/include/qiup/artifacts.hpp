#pragma once
#include "qiup/greymap.hpp"
#include "qiup/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qiup {

/// Provenance stamped into every artifact.
struct ArtifactStamp {
  std::uint64_t config_hash{0};
  std::uint64_t seed{0};
};

/// Writes `image` as a 16-bit grey map and records the normalisation, range,
/// config hash and seed in `<path>.meta`. Throws InputError on non-finite
/// values and on I/O failure (naming the path).
void write_greymap(const Raster<double> &image, const std::filesystem::path &path, Normalization norm,
                   const ArtifactStamp &stamp = {});

/// Rotates an image by 180 degrees, undoing the physical inversion for display.
template <class T>
Raster<T> rotate_half_turn(const Raster<T> &image) {
  Raster<T> out(image.nx, image.ny);
  for (std::size_t iy = 0; iy < image.ny; ++iy)
    for (std::size_t ix = 0; ix < image.nx; ++ix)
      out(image.nx - 1 - ix, image.ny - 1 - iy) = image(ix, iy);
  return out;
}

/// A comma-separated table with one header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

/// Number formatting shared by all text outputs ('.' decimals, locale-free).
std::string format_number(double v);
std::string format_table(const Table &table);

/// Writes the artifacts of one run into a directory. Files are tracked so that
/// an uncommitted writer removes everything it wrote when destroyed.
class ArtifactWriter {
public:
  ArtifactWriter(std::filesystem::path dir, ArtifactStamp stamp, bool upright);
  ~ArtifactWriter();
  ArtifactWriter(const ArtifactWriter &) = delete;
  ArtifactWriter &operator=(const ArtifactWriter &) = delete;

  /// Writes a map in display orientation (rotated when upright).
  void map(const std::string &name, const Raster<double> &image, Normalization norm);
  void table(const std::string &name, const Table &table);
  void text(const std::string &name, const std::string &content);

  /// Keeps the written files.
  void commit() { committed_ = true; }

  const std::filesystem::path &directory() const { return dir_; }
  const std::vector<std::string> &written() const { return names_; }

private:
  void stamp_file(const std::string &name, const std::string &extra);
  std::filesystem::path track(const std::string &name);

  std::filesystem::path dir_;
  ArtifactStamp stamp_;
  bool upright_;
  bool committed_{false};
  std::vector<std::string> names_;
  std::vector<std::filesystem::path> files_;
};

} // namespace qiup
