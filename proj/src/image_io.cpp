#include "lvnf/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace lvnf {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void write_png(const std::string& path, int width, int height, int color_type, int bit_depth,
               const void* rows_base, size_t row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // buffers are host little-endian

  std::vector<png_bytep> rows(height);
  auto* base = const_cast<png_bytep>(static_cast<const png_byte*>(rows_base));
  for (int y = 0; y < height; ++y) rows[y] = base + y * row_bytes;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FilePtr fp;

  explicit PngReader(const std::string& path) : fp(std::fopen(path.c_str(), "rb")) {
    if (!fp) throw DataError("cannot open: " + path);
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info = png_create_info_struct(png);
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

}  // namespace

void write_png_rgb8(const std::string& path, const ImageU8& img) {
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.data.data(),
            static_cast<size_t>(img.width) * 3);
}

void write_png_gray8(const std::string& path, const ImageU8& img) {
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, img.data.data(),
            static_cast<size_t>(img.width));
}

void write_png_gray16(const std::string& path, const ImageU16& img) {
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 16, img.data.data(),
            static_cast<size_t>(img.width) * 2);
}

ImageU8 read_png_rgb8(const std::string& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png read failed: " + path);
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);

  png_set_strip_16(r.png);
  png_set_palette_to_rgb(r.png);
  png_set_expand_gray_1_2_4_to_8(r.png);
  png_set_strip_alpha(r.png);
  png_set_gray_to_rgb(r.png);
  png_read_update_info(r.png, r.info);

  int w = png_get_image_width(r.png, r.info);
  int h = png_get_image_height(r.png, r.info);
  ImageU8 img(w, h, 3);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = img.data.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(r.png, rows.data());
  return img;
}

ImageU8 read_png_gray8(const std::string& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png read failed: " + path);
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);

  png_set_strip_16(r.png);
  png_set_expand_gray_1_2_4_to_8(r.png);
  png_set_strip_alpha(r.png);
  png_set_rgb_to_gray(r.png, 1, -1, -1);
  png_read_update_info(r.png, r.info);

  int w = png_get_image_width(r.png, r.info);
  int h = png_get_image_height(r.png, r.info);
  ImageU8 img(w, h, 1);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = img.data.data() + static_cast<size_t>(y) * w;
  png_read_image(r.png, rows.data());
  return img;
}

ImageU16 read_png_gray16(const std::string& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png read failed: " + path);
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);

  int bit_depth = png_get_bit_depth(r.png, r.info);
  int color_type = png_get_color_type(r.png, r.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
    throw DataError("expected 16-bit grayscale png: " + path);
  png_set_swap(r.png);
  png_read_update_info(r.png, r.info);

  int w = png_get_image_width(r.png, r.info);
  int h = png_get_image_height(r.png, r.info);
  ImageU16 img(w, h, 1);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = reinterpret_cast<png_bytep>(img.data.data() + static_cast<size_t>(y) * w);
  png_read_image(r.png, rows.data());
  return img;
}

}  // namespace lvnf
