#include "lvnf/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace lvnf {

// ---------------------------------------------------------------------------
// KdTree3

namespace {
constexpr int kLeafSize = 16;
}

KdTree3::KdTree3(const std::vector<Vec3>& points) : points_(points) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) root_ = build(0, int(points_.size()));
}

int KdTree3::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return int(nodes_.size()) - 1;
  }
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];
  int self = int(nodes_.size());
  nodes_.push_back(node);
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::nearest_rec(int ni, const Vec3& q, int& best, double& best_d2) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      double d2 = (points_[order_[i]] - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = order_[i];
      }
    }
    return;
  }
  double diff = q[node.axis] - node.split;
  int first = diff < 0.0 ? node.left : node.right;
  int second = diff < 0.0 ? node.right : node.left;
  nearest_rec(first, q, best, best_d2);
  if (diff * diff < best_d2) nearest_rec(second, q, best, best_d2);
}

int KdTree3::nearest(const Vec3& q, double* dist2) const {
  if (points_.empty()) return -1;
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  nearest_rec(root_, q, best, best_d2);
  if (dist2) *dist2 = best_d2;
  return best;
}

void KdTree3::count_rec(int ni, const Vec3& q, double r2, int stop_at, int& count) const {
  if (count >= stop_at) return;
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end && count < stop_at; ++i)
      if ((points_[order_[i]] - q).squaredNorm() <= r2) ++count;
    return;
  }
  double diff = q[node.axis] - node.split;
  int first = diff < 0.0 ? node.left : node.right;
  int second = diff < 0.0 ? node.right : node.left;
  count_rec(first, q, r2, stop_at, count);
  if (diff * diff <= r2) count_rec(second, q, r2, stop_at, count);
}

int KdTree3::count_within(const Vec3& q, double radius, int stop_at) const {
  if (points_.empty()) return 0;
  int count = 0;
  count_rec(root_, q, radius * radius, stop_at, count);
  return count;
}

void KdTree3::radius_rec(int ni, const Vec3& q, double r2, std::vector<int>& out) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i)
      if ((points_[order_[i]] - q).squaredNorm() <= r2) out.push_back(order_[i]);
    return;
  }
  double diff = q[node.axis] - node.split;
  int first = diff < 0.0 ? node.left : node.right;
  int second = diff < 0.0 ? node.right : node.left;
  radius_rec(first, q, r2, out);
  if (diff * diff <= r2) radius_rec(second, q, r2, out);
}

void KdTree3::radius_search(const Vec3& q, double radius, std::vector<int>& out) const {
  out.clear();
  if (points_.empty()) return;
  radius_rec(root_, q, radius * radius, out);
}

// ---------------------------------------------------------------------------
// PLY

void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write ply: " + path);
  const bool colors = cloud.has_colors();
  const bool normals = cloud.has_normals();
  os << "ply\nformat binary_little_endian 1.0\n";
  os << "element vertex " << cloud.size() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  if (colors) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (normals) os << "property float nx\nproperty float ny\nproperty float nz\n";
  os << "end_header\n";
  for (size_t i = 0; i < cloud.size(); ++i) {
    float xyz[3] = {float(cloud.positions[i].x()), float(cloud.positions[i].y()),
                    float(cloud.positions[i].z())};
    os.write(reinterpret_cast<const char*>(xyz), 12);
    if (colors) os.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    if (normals) {
      float n[3] = {float(cloud.normals[i].x()), float(cloud.normals[i].y()),
                    float(cloud.normals[i].z())};
      os.write(reinterpret_cast<const char*>(n), 12);
    }
  }
  if (!os) throw DataError("ply write failed: " + path);
}

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
};

size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw DataError("unsupported ply property type: " + t);
}

double ply_read_binary(const char* p, const std::string& t) {
  if (t == "float" || t == "float32") {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (t == "double" || t == "float64") {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  if (t == "uchar" || t == "uint8") return *reinterpret_cast<const uint8_t*>(p);
  if (t == "char" || t == "int8") return *reinterpret_cast<const int8_t*>(p);
  if (t == "short" || t == "int16") {
    int16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (t == "ushort" || t == "uint16") {
    uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (t == "int" || t == "int32") {
    int32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (t == "uint" || t == "uint32") {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  throw DataError("unsupported ply property type: " + t);
}

}  // namespace

PointCloud read_ply(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open ply: " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0)
    throw DataError("not a ply file: " + path);

  bool binary = false, ascii = false;
  size_t vertex_count = 0;
  std::vector<PlyProperty> props;
  bool in_vertex = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") ascii = true;
      else throw DataError("unsupported ply format in " + path + ": " + fmt);
    } else if (tok == "element") {
      std::string name;
      size_t count;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) vertex_count = count;
      else if (count > 0) throw DataError("unsupported non-vertex ply element in " + path);
    } else if (tok == "property" && in_vertex) {
      PlyProperty p;
      ss >> p.type >> p.name;
      if (p.type == "list") throw DataError("list properties unsupported in " + path);
      props.push_back(p);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!binary && !ascii) throw DataError("missing ply format line: " + path);

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, inx = -1, iny = -1, inz = -1;
  for (size_t i = 0; i < props.size(); ++i) {
    const std::string& n = props[i].name;
    if (n == "x") ix = int(i);
    else if (n == "y") iy = int(i);
    else if (n == "z") iz = int(i);
    else if (n == "red") ir = int(i);
    else if (n == "green") ig = int(i);
    else if (n == "blue") ib = int(i);
    else if (n == "nx") inx = int(i);
    else if (n == "ny") iny = int(i);
    else if (n == "nz") inz = int(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw DataError("ply missing x/y/z properties: " + path);
  const bool colors = ir >= 0 && ig >= 0 && ib >= 0;
  const bool normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  cloud.positions.reserve(vertex_count);

  if (binary) {
    size_t stride = 0;
    std::vector<size_t> offset(props.size());
    for (size_t i = 0; i < props.size(); ++i) {
      offset[i] = stride;
      stride += ply_type_size(props[i].type);
    }
    std::vector<char> row(stride);
    for (size_t v = 0; v < vertex_count; ++v) {
      is.read(row.data(), std::streamsize(stride));
      if (!is) throw DataError("truncated ply: " + path);
      auto val = [&](int i) { return ply_read_binary(row.data() + offset[i], props[i].type); };
      cloud.positions.emplace_back(val(ix), val(iy), val(iz));
      if (colors)
        cloud.colors.push_back({uint8_t(val(ir)), uint8_t(val(ig)), uint8_t(val(ib))});
      if (normals) cloud.normals.emplace_back(val(inx), val(iny), val(inz));
    }
  } else {
    std::vector<double> vals(props.size());
    for (size_t v = 0; v < vertex_count; ++v) {
      for (size_t i = 0; i < props.size(); ++i)
        if (!(is >> vals[i])) throw DataError("truncated ascii ply: " + path);
      cloud.positions.emplace_back(vals[ix], vals[iy], vals[iz]);
      if (colors)
        cloud.colors.push_back({uint8_t(vals[ir]), uint8_t(vals[ig]), uint8_t(vals[ib])});
      if (normals) cloud.normals.emplace_back(vals[inx], vals[iny], vals[inz]);
    }
  }
  return cloud;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0.0) return cloud;
  PointCloud out;
  std::map<std::tuple<int64_t, int64_t, int64_t>, bool> seen;
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    auto key = std::make_tuple(int64_t(std::floor(p.x() / voxel_size)),
                               int64_t(std::floor(p.y() / voxel_size)),
                               int64_t(std::floor(p.z() / voxel_size)));
    if (seen.emplace(key, true).second) {
      out.positions.push_back(p);
      if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
      if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
    }
  }
  return out;
}

}  // namespace lvnf
