#pragma once

// Grayscale image files: binary PGM (P5, 8-bit) and PNG (8-bit).

#include <filesystem>
#include <string>
#include <vector>

#include "inband/grid.hpp"

namespace inband::io {

struct LoadedImage {
  Grid pixels;
  std::vector<std::string> warnings;  // e.g. colour input reduced to luminance
};

/// Reads by content (PGM magic "P5" or the PNG signature). Colour PNGs are
/// reduced to 0.299 R + 0.587 G + 0.114 B with a warning. Throws IoError when
/// the file cannot be opened and FormatError, naming the byte offset where
/// possible, for anything else it cannot decode (16-bit data included).
LoadedImage read_image(const std::filesystem::path& path);

/// Format by extension: ".png" writes PNG, anything else PGM. Values are
/// rounded and clamped to [0, 255].
void write_image(const std::filesystem::path& path, const Grid& g);

/// PGM bytes of `g`, as write_image would store them.
std::string encode_pgm(const Grid& g);

/// Parses PGM bytes; `name` only labels error messages.
Grid decode_pgm(const std::string& bytes, const std::string& name = "<memory>");

}  // namespace inband::io
