#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace workbench {

// 8-bit RGB raster, row-major, no padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* pixel(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

Image solid_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

std::vector<std::uint8_t> encode_png(const Image& image);
// Throws InputError when the bytes are not a PNG libpng can read.
Image decode_png(std::span<const std::uint8_t> bytes);
bool is_decodable_png(std::span<const std::uint8_t> bytes);

// Box-filter downscale so the longer side is at most max_side.
Image downscale(const Image& image, int max_side);

}  // namespace workbench
