#pragma once

#include <vector>

#include "lvnf/dataset.hpp"
#include "lvnf/field.hpp"
#include "lvnf/point_cloud.hpp"
#include "lvnf/rendering.hpp"

namespace lvnf {

struct ExtractOptions {
  int target_count = 200000;
  double opacity_gate = 0.7;       // tau_o: min ray opacity to emit a point
  int n_coarse = 64;
  int n_fine = 64;
  double near = 0.1;
  double far = 120.0;
  uint64_t seed = 0;
  int attempts_factor = 20;        // ray budget = attempts_factor * target_count
  bool world_frame = true;         // false keeps points in the submap local frame
  bool skip_sky_pixels = false;    // drop rays whose pixel is sky-masked
};

// Renders color and depth along rays drawn uniformly from the training
// pixels; rays with opacity >= tau_o emit a point at origin + depth * dir.
// Positions are metric (world frame by default). Empty output with a warning
// when the field never reaches the opacity gate.
PointCloud extract_points(const RadianceField& field, const Dataset& ds,
                          const std::vector<int>& frame_indices, const ExtractOptions& opt);

struct CullOptions {
  bool use_density_gate = true;
  double min_density = 1.0;        // tau_sigma, 1/m in metric units
  bool use_neighbor_gate = true;
  double radius = 0.2;             // metres
  int min_neighbors = 5;           // neighbors within radius, excluding self
};

// Removes points in low-density regions: field density below tau_sigma or too
// few neighbors. Points are in the field's local metric frame (pass field =
// nullptr to skip the density gate).
PointCloud cull_low_density(const PointCloud& cloud, const RadianceField* field,
                            const CullOptions& opt);

struct Submap {
  PointCloud cloud;              // local metric frame
  Sim3 world_from_local;
  const RadianceField* field = nullptr;  // for the density gate; may be null
};

struct MergeOptions {
  bool cull = true;
  CullOptions cull_options;
  double voxel_size = 0.0;  // 0 disables downsampling
};

// Per-submap culling, Sim3 placement into the world frame (normals rotated),
// concatenation, optional voxel downsample.
PointCloud merge_submaps(const std::vector<Submap>& submaps, const MergeOptions& opt);

// Field density in metric units at a local metric position.
double metric_density(const RadianceField& field, const Vec3& p_local);

}  // namespace lvnf
