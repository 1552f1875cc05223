#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvnf {

using Scalar = double;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec2i = Eigen::Vector2i;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix3Xd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Quat = Eigen::Quaterniond;

// Dataset/file-content problems (missing files, malformed records).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite losses/gradients and similar numerical breakdowns.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense interleaved image, row-major, `channels` values per pixel.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, int ch, T fill = T(0))
      : width(w), height(h), channels(ch), data(static_cast<size_t>(w) * h * ch, fill) {}

  bool empty() const { return data.empty(); }
  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  T& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

using ImageF = Image<double>;     // values in [0,1] for color, meters for depth
using ImageU8 = Image<uint8_t>;
using ImageU16 = Image<uint16_t>;

inline uint8_t to_u8(double v) {
  double s = v * 255.0 + 0.5;
  if (s < 0.0) s = 0.0;
  if (s > 255.0) s = 255.0;
  return static_cast<uint8_t>(s);
}

inline ImageU8 quantize_u8(const ImageF& img) {
  ImageU8 out(img.width, img.height, img.channels);
  for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = to_u8(img.data[i]);
  return out;
}

inline ImageF dequantize_u8(const ImageU8& img) {
  ImageF out(img.width, img.height, img.channels);
  for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] / 255.0;
  return out;
}

// Depth images travel as 16-bit millimetres, 0 = no return.
inline ImageU16 depth_to_mm(const ImageF& depth_m) {
  ImageU16 out(depth_m.width, depth_m.height, 1);
  for (size_t i = 0; i < depth_m.data.size(); ++i) {
    double mm = depth_m.data[i] * 1000.0 + 0.5;
    if (mm < 0.0) mm = 0.0;
    if (mm > 65535.0) mm = 65535.0;
    out.data[i] = static_cast<uint16_t>(mm);
  }
  return out;
}

inline ImageF depth_from_mm(const ImageU16& depth_mm) {
  ImageF out(depth_mm.width, depth_mm.height, 1);
  for (size_t i = 0; i < depth_mm.data.size(); ++i) out.data[i] = depth_mm.data[i] / 1000.0;
  return out;
}

// Normal images use n = 2*(v/255) - 1 per channel.
inline ImageU8 encode_normals(const ImageF& normals) {
  ImageU8 out(normals.width, normals.height, 3);
  for (size_t i = 0; i < normals.data.size(); ++i)
    out.data[i] = to_u8((normals.data[i] + 1.0) * 0.5);
  return out;
}

inline Vec3 decode_normal(uint8_t r, uint8_t g, uint8_t b) {
  Vec3 n(2.0 * (r / 255.0) - 1.0, 2.0 * (g / 255.0) - 1.0, 2.0 * (b / 255.0) - 1.0);
  double len = n.norm();
  return len > 1e-9 ? Vec3(n / len) : Vec3(0, 0, 0);
}

}  // namespace lvnf
