#pragma once

#include <string>

#include "irdet/types.hpp"

namespace irdet {

/// Reads a binary (P5) 8-bit or 16-bit grayscale PGM. Sample values map
/// directly to intensities in their native range.
/// Errors: "missing file", "malformed image", "not grayscale".
PixelGrid load_image(const std::string& path);

/// Writes a binary (P5) PGM with canonical header "P5\n<w> <h>\n<maxval>\n".
/// maxval 0 picks 255 when every value fits in a byte, 65535 otherwise.
/// Values are rounded and clamped to [0, maxval]. Files written here
/// round-trip byte-identically through load_image + write_pgm.
void write_pgm(const std::string& path, const PixelGrid& grid, int maxval = 0);

/// Label masks interchange as {0, 255} PGM.
void write_label_pgm(const std::string& path, const LabelGrid& labels);
LabelGrid load_label_pgm(const std::string& path);

}  // namespace irdet
