#include "dislogen/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace dislogen::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open file", path.string());
  return f;
}

void on_png_error(png_structp png_ptr, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png_ptr));
  if (what) *what = msg;
  png_longjmp(png_ptr, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

void write_gray8(const std::filesystem::path& path, const Gray8& pixels) {
  if (pixels.empty()) throw ParameterError("cannot write an empty image: " + path.string());
  auto file = open_file(path, "wb");
  std::string message;
  png_structp png_ptr =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png_ptr) throw IoError("png_create_write_struct failed", path.string());
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_write_struct(&png_ptr, nullptr);
    throw IoError("png_create_info_struct failed", path.string());
  }

  std::vector<png_bytep> row_ptrs(pixels.rows());
  for (std::size_t r = 0; r < pixels.rows(); ++r) {
    row_ptrs[r] = const_cast<png_bytep>(&pixels(r, 0));
  }

  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_write_struct(&png_ptr, &info_ptr);
    throw IoError("libpng write failed (" + message + ")", path.string());
  }
  png_init_io(png_ptr, file.get());
  png_set_IHDR(png_ptr, info_ptr, static_cast<png_uint_32>(pixels.cols()),
               static_cast<png_uint_32>(pixels.rows()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Level 3 is several times faster than the default and the masks are tiny.
  png_set_compression_level(png_ptr, 3);
  png_write_info(png_ptr, info_ptr);
  png_write_image(png_ptr, row_ptrs.data());
  png_write_end(png_ptr, nullptr);
  png_destroy_write_struct(&png_ptr, &info_ptr);

  if (std::fflush(file.get()) != 0) throw IoError("write failed", path.string());
}

Gray8 read_gray8(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  std::string message;
  png_structp png_ptr =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png_ptr) throw IoError("png_create_read_struct failed", path.string());
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_read_struct(&png_ptr, nullptr, nullptr);
    throw IoError("png_create_info_struct failed", path.string());
  }

  Gray8 out;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    throw IoError("libpng read failed (" + message + ")", path.string());
  }
  png_init_io(png_ptr, file.get());
  png_read_info(png_ptr, info_ptr);

  const auto color = png_get_color_type(png_ptr, info_ptr);
  const auto depth = png_get_bit_depth(png_ptr, info_ptr);
  if (depth == 16) png_set_strip_16(png_ptr);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png_ptr);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png_ptr);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png_ptr);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png_ptr, 1, -1, -1);
  }
  png_read_update_info(png_ptr, info_ptr);

  const auto width = png_get_image_width(png_ptr, info_ptr);
  const auto height = png_get_image_height(png_ptr, info_ptr);
  out = Gray8(height, width);
  row_ptrs.resize(height);
  for (std::size_t r = 0; r < height; ++r) row_ptrs[r] = &out(r, 0);
  png_read_image(png_ptr, row_ptrs.data());
  png_read_end(png_ptr, nullptr);
  png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
  return out;
}

Gray8 quantize(const ScalarGrid& g) {
  Gray8 out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(src[i], 0.0, 1.0)));
  }
  return out;
}

ScalarGrid dequantize(const Gray8& g) {
  ScalarGrid out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
  return out;
}

Gray8 mask_to_gray8(const BinaryGrid& mask) {
  Gray8 out(mask.rows(), mask.cols());
  auto src = mask.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  return out;
}

}  // namespace dislogen::png
