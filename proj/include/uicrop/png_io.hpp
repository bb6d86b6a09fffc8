#pragma once

#include <string>

#include "uicrop/image.hpp"

namespace uicrop {

// Decodes any 8/16-bit gray/palette/RGB/RGBA PNG into packed RGB8.
// Throws IoError when the file cannot be opened, DecodeError on malformed
// data.
PixelImage read_png(const std::string& path);

// Writes packed RGB8. Output bytes are a pure function of the pixels (no
// timestamps or ancillary chunks), so identical images encode identically.
void write_png(const PixelImage& img, const std::string& path);

}  // namespace uicrop
