#pragma once

#include <cstdint>
#include <filesystem>

#include "dislogen/grid.hpp"

namespace dislogen::png {

using Gray8 = Grid<std::uint8_t>;

// 8-bit grayscale, non-interlaced. Output bytes depend only on the pixels.
void write_gray8(const std::filesystem::path& path, const Gray8& pixels);

// Reads any PNG and converts it to 8-bit grayscale.
Gray8 read_gray8(const std::filesystem::path& path);

// round(255 * clamp(v, 0, 1)) per pixel.
Gray8 quantize(const ScalarGrid& g);
ScalarGrid dequantize(const Gray8& g);

// Foreground pixels become 255.
Gray8 mask_to_gray8(const BinaryGrid& mask);

}  // namespace dislogen::png
