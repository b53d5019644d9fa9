#include "qiup/greymap.hpp"
#include "qiup/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace qiup {

namespace {

std::string printable_header(const std::vector<unsigned char> &bytes) {
  std::string out;
  for (std::size_t i = 0; i < std::min<std::size_t>(bytes.size(), 16); ++i) {
    const unsigned char c = bytes[i];
    if (std::isprint(c))
      out += static_cast<char>(c);
    else
      out += fmt::format("\\x{:02x}", c);
  }
  return out;
}

class HeaderReader {
public:
  HeaderReader(const std::vector<unsigned char> &bytes, const std::filesystem::path &path)
      : bytes_(bytes), path_(path) {}

  [[noreturn]] void fail(const std::string &why) const {
    throw InputError(fmt::format("{}: not a binary grey map ({}); header bytes \"{}\"", path_.string(),
                                 why, printable_header(bytes_)));
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
          ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_number(const char *what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      fail(fmt::format("missing {}", what));
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000UL)
        fail(fmt::format("{} too large", what));
      ++pos_;
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

private:
  const std::vector<unsigned char> &bytes_;
  const std::filesystem::path &path_;
  std::size_t pos_{2};
};

} // namespace

GreyMap read_greymap(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError(fmt::format("{}: cannot open grey map", path.string()));
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  HeaderReader hdr(bytes, path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    hdr.fail("magic number is not P5");

  GreyMap map;
  map.width = hdr.read_number("width");
  map.height = hdr.read_number("height");
  const unsigned long maxval = hdr.read_number("maxval");
  if (map.width == 0 || map.height == 0)
    hdr.fail("zero image size");
  if (maxval == 0 || maxval > 65535)
    hdr.fail(fmt::format("maxval {} outside 1..65535", maxval));
  map.maxval = static_cast<unsigned>(maxval);
  if (hdr.pos() >= bytes.size() || !std::isspace(bytes[hdr.pos()]))
    hdr.fail("no whitespace after maxval");
  hdr.advance();

  const std::size_t bytes_per_sample = map.maxval < 256 ? 1 : 2;
  const std::size_t n = map.width * map.height;
  if (bytes.size() - hdr.pos() < n * bytes_per_sample)
    hdr.fail(fmt::format("truncated raster: expected {} bytes of samples, found {}", n * bytes_per_sample,
                         bytes.size() - hdr.pos()));
  map.samples.resize(n);
  const unsigned char *p = bytes.data() + hdr.pos();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes_per_sample == 1 ? p[i] : (unsigned(p[2 * i]) << 8) | p[2 * i + 1];
    if (v > map.maxval)
      hdr.fail(fmt::format("sample {} exceeds maxval", v));
    map.samples[i] = static_cast<std::uint16_t>(v);
  }
  return map;
}

void write_greymap16(const std::filesystem::path &path, const GreyMap &map,
                     const std::vector<std::string> &comments) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw InputError(fmt::format("{}: cannot open for writing", path.string()));
  std::string header = "P5\n";
  for (const auto &c : comments)
    header += "# " + c + "\n";
  header += fmt::format("{} {}\n65535\n", map.width, map.height);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<char> raw(map.samples.size() * 2);
  for (std::size_t i = 0; i < map.samples.size(); ++i) {
    raw[2 * i] = static_cast<char>(map.samples[i] >> 8);
    raw[2 * i + 1] = static_cast<char>(map.samples[i] & 0xff);
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out)
    throw InputError(fmt::format("{}: write failed", path.string()));
}

GreyMap quantize(const Raster<double> &image, Normalization norm, double *used_lo, double *used_hi) {
  double lo = norm.lo, hi = norm.hi;
  if (norm.mode == Normalization::Mode::fixed_range && !(hi > lo))
    throw InputError(fmt::format("grey map: empty normalisation range [{}, {}]", lo, hi));
  if (norm.mode == Normalization::Mode::per_image && !image.data.empty()) {
    const auto [mn, mx] = std::minmax_element(image.data.begin(), image.data.end());
    lo = *mn;
    hi = *mx;
  }
  for (double v : image.data)
    if (!std::isfinite(v))
      throw NumericError("grey map: image contains non-finite values");
  const double span = hi > lo ? hi - lo : 1.0;

  GreyMap map;
  map.width = image.nx;
  map.height = image.ny;
  map.maxval = 65535;
  map.samples.resize(image.size());
  for (std::size_t iy = 0; iy < image.ny; ++iy)
    for (std::size_t ix = 0; ix < image.nx; ++ix) {
      const double t = std::clamp((image(ix, iy) - lo) / span, 0.0, 1.0);
      map.samples[(image.ny - 1 - iy) * image.nx + ix] =
          static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
  if (used_lo)
    *used_lo = lo;
  if (used_hi)
    *used_hi = hi;
  return map;
}

} // namespace qiup
