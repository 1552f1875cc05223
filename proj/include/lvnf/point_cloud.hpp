#pragma once

#include <array>
#include <string>
#include <vector>

#include "lvnf/types.hpp"

namespace lvnf {

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<std::array<uint8_t, 3>> colors;  // may be empty
  std::vector<Vec3> normals;                   // may be empty

  size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_colors() const { return colors.size() == positions.size() && !positions.empty(); }
  bool has_normals() const { return normals.size() == positions.size() && !positions.empty(); }

  void push(const Vec3& p) { positions.push_back(p); }
  void push(const Vec3& p, const std::array<uint8_t, 3>& c) {
    positions.push_back(p);
    colors.push_back(c);
  }
};

// Exact 3D nearest-neighbor / radius queries over an immutable point set.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points);

  bool empty() const { return points_.empty(); }

  // Index of the nearest point; squared distance in dist2 if given.
  int nearest(const Vec3& query, double* dist2 = nullptr) const;

  // Number of points with distance <= radius, stopping early once the count
  // reaches stop_at (for threshold tests).
  int count_within(const Vec3& query, double radius, int stop_at = INT32_MAX) const;

  void radius_search(const Vec3& query, double radius, std::vector<int>& out) const;

 private:
  struct Node {
    int axis = -1;       // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf point range
  };
  std::vector<Vec3> points_;
  std::vector<int> order_;  // permutation into points_
  std::vector<Node> nodes_;
  int root_ = -1;

  int build(int begin, int end);
  void nearest_rec(int node, const Vec3& q, int& best, double& best_d2) const;
  void count_rec(int node, const Vec3& q, double r2, int stop_at, int& count) const;
  void radius_rec(int node, const Vec3& q, double r2, std::vector<int>& out) const;
};

// Binary little-endian PLY writer: x y z float32, red green blue uint8,
// optional nx ny nz float32.
void write_ply(const std::string& path, const PointCloud& cloud);

// Reads binary little-endian or ASCII PLY with at least x y z properties.
PointCloud read_ply(const std::string& path);

// Keeps the first point seen per voxel (deterministic in input order).
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

}  // namespace lvnf
