#include "qiup/artifacts.hpp"
#include "qiup/error.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace qiup {

namespace {

std::string stamp_text(const ArtifactStamp &stamp) {
  return fmt::format("config_hash = {:016x}\nseed = {}\n", stamp.config_hash, stamp.seed);
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw InputError(fmt::format("write to '{}' failed", path.string()));
}

std::string normalization_text(Normalization norm, double lo, double hi) {
  return fmt::format("normalization = {}\nrange_lo = {}\nrange_hi = {}\n",
                     norm.mode == Normalization::Mode::fixed_range ? "fixed" : "per_image", format_number(lo),
                     format_number(hi));
}

} // namespace

void write_greymap(const Raster<double> &image, const std::filesystem::path &path, Normalization norm,
                   const ArtifactStamp &stamp) {
  for (double v : image.data)
    if (!std::isfinite(v))
      throw InputError(fmt::format("{}: image contains non-finite values", path.string()));
  double lo = 0.0, hi = 1.0;
  const GreyMap map = quantize(image, norm, &lo, &hi);
  write_greymap16(path, map,
                  {fmt::format("config_hash {:016x}", stamp.config_hash), fmt::format("seed {}", stamp.seed)});
  std::filesystem::path meta = path;
  meta += ".meta";
  write_file(meta, stamp_text(stamp) + normalization_text(norm, lo, hi));
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size())
    throw InputError(fmt::format("table row has {} cells, header has {}", cells.size(), header.size()));
  rows.push_back(std::move(cells));
}

std::string format_number(double v) { return fmt::format("{:.10g}", v); }

std::string format_table(const Table &table) {
  std::string out;
  const auto line = [&out](const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i)
        out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto &r : table.rows)
    line(r);
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, ArtifactStamp stamp, bool upright)
    : dir_(std::move(dir)), stamp_(stamp), upright_(upright) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec)
    throw InputError(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
}

ArtifactWriter::~ArtifactWriter() {
  if (committed_)
    return;
  std::error_code ec;
  for (auto it = files_.rbegin(); it != files_.rend(); ++it)
    std::filesystem::remove(*it, ec);
}

std::filesystem::path ArtifactWriter::track(const std::string &name) {
  const std::filesystem::path path = dir_ / name;
  files_.push_back(path);
  return path;
}

void ArtifactWriter::stamp_file(const std::string &name, const std::string &extra) {
  write_file(track(name + ".meta"), stamp_text(stamp_) + extra);
}

void ArtifactWriter::map(const std::string &name, const Raster<double> &image, Normalization norm) {
  const Raster<double> shown = upright_ ? rotate_half_turn(image) : image;
  const std::filesystem::path path = track(name);
  files_.push_back(path.string() + ".meta");
  names_.push_back(name);
  write_greymap(shown, path, norm, stamp_);
}

void ArtifactWriter::table(const std::string &name, const Table &table) {
  write_file(track(name), format_table(table));
  names_.push_back(name);
  stamp_file(name, "");
}

void ArtifactWriter::text(const std::string &name, const std::string &content) {
  write_file(track(name), content);
  names_.push_back(name);
}

} // namespace qiup
