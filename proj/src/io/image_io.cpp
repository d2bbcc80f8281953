#include "inband/io/image_io.hpp"

#include <png.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "inband/error.hpp"

namespace inband::io {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("write failed for " + path.string());
}

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L)); }

bool is_png(const std::string& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

LoadedImage decode_png(const std::string& bytes, const std::string& name) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw FormatError(name + ": " + image.message);
  // The simplified reader flags 16-bit files as linear.
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw FormatError(name + ": 16-bit PNG is not supported (IHDR at byte 16)");
  }
  LoadedImage out;
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  if (image.format & PNG_FORMAT_FLAG_ALPHA) out.warnings.push_back(name + ": alpha channel ignored");
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = colour ? 3 : 1;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) throw FormatError(name + ": " + image.message);

  const int rows = static_cast<int>(image.height), cols = static_cast<int>(image.width);
  out.pixels = Grid(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const png_byte* p = &buf[(static_cast<std::size_t>(i) * cols + j) * channels];
      out.pixels(i, j) = colour ? 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2] : p[0];
    }
  if (colour) out.warnings.push_back(name + ": colour image converted to luminance");
  return out;
}

}  // namespace

Grid decode_pgm(const std::string& bytes, const std::string& name) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) { throw FormatError(name + ": " + what + " at byte " + std::to_string(pos)); };
  if (bytes.size() < 2 || bytes[0] != 'P') fail("not a PGM file");
  if (bytes[1] != '5') fail(std::string("unsupported PNM variant P") + bytes[1]);
  pos = 2;
  auto number = [&] {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#')
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      else
        break;
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) fail("expected a number");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) fail("header value too large");
    }
    return v;
  };
  const long cols = number(), rows = number(), maxval = number();
  if (cols < 1 || rows < 1) fail("empty image");
  if (maxval < 1) fail("maxval must be positive");
  if (maxval > 255) fail("16-bit PGM (maxval " + std::to_string(maxval) + ") is not supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) fail("expected whitespace");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(rows * cols);
  if (bytes.size() - pos < need) fail("raster truncated");
  Grid g(static_cast<int>(rows), static_cast<int>(cols));
  auto v = g.values();
  for (std::size_t i = 0; i < need; ++i) v[i] = static_cast<unsigned char>(bytes[pos + i]);
  return g;
}

std::string encode_pgm(const Grid& g) {
  std::string out = "P5\n" + std::to_string(g.cols()) + " " + std::to_string(g.rows()) + "\n255\n";
  for (double v : g.values()) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

LoadedImage read_image(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  LoadedImage out = is_png(bytes) ? decode_png(bytes, path.string()) : LoadedImage{decode_pgm(bytes, path.string()), {}};
  for (const auto& w : out.warnings) spdlog::debug("{}", w);
  return out;
}

void write_image(const std::filesystem::path& path, const Grid& g) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext != ".png") {
    const std::string bytes = encode_pgm(g);
    spill(path, bytes.data(), bytes.size());
    return;
  }
  std::vector<png_byte> buf(g.size());
  std::transform(g.values().begin(), g.values().end(), buf.begin(), to_byte);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(g.cols());
  image.height = static_cast<png_uint_32>(g.rows());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr))
    throw IoError(path.string() + ": " + image.message);
}

}  // namespace inband::io
