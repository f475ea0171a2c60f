#pragma once

#include <filesystem>

#include "lanegen/image.hpp"

namespace lanegen {

// 8-bit RGB PNG I/O. Reading converts grayscale/RGBA/palette files to RGB
// and maps channels to [0, 1]; writing rounds to 8-bit. Values written from
// a palette-rendered label image round-trip exactly because palette colors
// are defined on the 8-bit grid.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& img, const std::filesystem::path& path);

}  // namespace lanegen
