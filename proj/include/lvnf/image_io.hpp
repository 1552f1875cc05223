#pragma once

#include <string>

#include "lvnf/types.hpp"

namespace lvnf {

// 8-bit RGB (color, normal) and 16-bit grayscale (depth in mm) PNG codecs.
// Readers throw DataError naming the path on any failure.

void write_png_rgb8(const std::string& path, const ImageU8& img);
void write_png_gray8(const std::string& path, const ImageU8& img);
void write_png_gray16(const std::string& path, const ImageU16& img);

ImageU8 read_png_rgb8(const std::string& path);
ImageU8 read_png_gray8(const std::string& path);
ImageU16 read_png_gray16(const std::string& path);

}  // namespace lvnf
