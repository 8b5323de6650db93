#include "workbench/image.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include <png.h>

#include "workbench/errors.hpp"

namespace workbench {

Image solid_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw ContractViolation("encode_png: raster size does not match dimensions");
  }
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width);
  desc.height = static_cast<png_uint_32>(image.height);
  desc.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
    throw InputError(std::string("png encode failed: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.rgb.data(), 0, nullptr)) {
    throw InputError(std::string("png encode failed: ") + desc.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw InputError("image payload is not a PNG");
  }
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw InputError(std::string("undecodable image: ") + desc.message);
  }
  desc.format = PNG_FORMAT_RGB;
  Image img;
  img.width = static_cast<int>(desc.width);
  img.height = static_cast<int>(desc.height);
  img.rgb.resize(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw InputError(std::string("undecodable image: ") + desc.message);
  }
  return img;
}

bool is_decodable_png(std::span<const std::uint8_t> bytes) {
  try {
    decode_png(bytes);
    return true;
  } catch (const InputError&) {
    return false;
  }
}

Image downscale(const Image& image, int max_side) {
  const int longest = std::max(image.width, image.height);
  if (max_side <= 0 || longest <= max_side) return image;
  const double factor = static_cast<double>(longest) / max_side;
  Image out;
  out.width = std::max(1, static_cast<int>(image.width / factor));
  out.height = std::max(1, static_cast<int>(image.height / factor));
  out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int y = 0; y < out.height; ++y) {
    const int y0 = static_cast<int>(y * factor);
    const int y1 = std::min(image.height, std::max(y0 + 1, static_cast<int>((y + 1) * factor)));
    for (int x = 0; x < out.width; ++x) {
      const int x0 = static_cast<int>(x * factor);
      const int x1 = std::min(image.width, std::max(x0 + 1, static_cast<int>((x + 1) * factor)));
      unsigned sum[3] = {0, 0, 0};
      unsigned count = 0;
      for (int sy = y0; sy < y1; ++sy) {
        for (int sx = x0; sx < x1; ++sx) {
          const auto* p = image.pixel(sx, sy);
          sum[0] += p[0];
          sum[1] += p[1];
          sum[2] += p[2];
          ++count;
        }
      }
      auto* q = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) q[c] = static_cast<std::uint8_t>(sum[c] / count);
    }
  }
  return out;
}

}  // namespace workbench
