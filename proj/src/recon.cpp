#include "lvnf/recon.hpp"

#include <cmath>
#include <iostream>

#include "lvnf/rng.hpp"

namespace lvnf {

double metric_density(const RadianceField& field, const Vec3& p_local) {
  SampleTape tape;
  const double s = field.scene_scale();
  return field.eval_sigma(p_local * s, tape) * s;
}

PointCloud extract_points(const RadianceField& field, const Dataset& ds,
                          const std::vector<int>& frame_indices, const ExtractOptions& opt) {
  if (opt.target_count < 1) throw std::invalid_argument("extract_points: target_count must be >= 1");
  if (frame_indices.empty()) throw std::invalid_argument("extract_points: no frames");

  std::vector<uint64_t> cum(frame_indices.size() + 1, 0);
  for (size_t i = 0; i < frame_indices.size(); ++i) {
    const PinholeCamera& cam = ds.camera_of(frame_indices[i]);
    cum[i + 1] = cum[i] + uint64_t(cam.width) * cam.height;
  }

  RenderOptions ropt;
  ropt.n_coarse = opt.n_coarse;
  ropt.n_fine = opt.n_fine;
  ropt.near = opt.near;
  ropt.far = opt.far;
  ropt.jitter = true;
  ropt.want_normals = true;

  const Sim3 world_from_local = field.world_from_local();
  const Sim3 local_from_world = world_from_local.inverse();

  Rng rng(opt.seed);
  PointCloud cloud;
  cloud.positions.reserve(opt.target_count);
  const uint64_t budget = uint64_t(opt.attempts_factor) * uint64_t(opt.target_count);
  for (uint64_t attempt = 0;
       attempt < budget && int(cloud.size()) < opt.target_count; ++attempt) {
    uint64_t pick = rng.uniform_int(cum.back());
    size_t fi = 0;
    while (pick >= cum[fi + 1]) ++fi;
    const int frame = frame_indices[fi];
    const PinholeCamera& cam = ds.camera_of(frame);
    uint64_t local = pick - cum[fi];
    int px = int(local % uint64_t(cam.width));
    int py = int(local / uint64_t(cam.width));
    if (opt.skip_sky_pixels && ds.has_sky(frame) && ds.sky_masks[frame].at(px, py) != 0)
      continue;

    Ray ray;
    ray.origin = ds.frames[frame].pose.t;
    ray.dir = (ds.frames[frame].pose.q * pixel_bearing(cam, px, py)).normalized();
    ray.frame_id = ds.frames[frame].id;

    RenderedPixel r = render_ray(field, ray, ropt, &rng);
    if (r.opacity < opt.opacity_gate) continue;

    Vec3 p_world = ray.origin + r.depth * ray.dir;
    Vec3 p = opt.world_frame ? p_world : local_from_world.apply(p_world);
    cloud.positions.push_back(p);
    cloud.colors.push_back({to_u8(r.color.x()), to_u8(r.color.y()), to_u8(r.color.z())});
    Vec3 n = r.has_normal ? r.normal : Vec3::Zero();  // render_ray returns world-frame normals
    if (!opt.world_frame && r.has_normal) n = local_from_world.rotate(n);
    cloud.normals.push_back(n);
  }

  if (cloud.empty())
    std::cerr << "warning: extract_points produced no points (opacity below "
              << opt.opacity_gate << " everywhere)\n";
  return cloud;
}

PointCloud cull_low_density(const PointCloud& cloud, const RadianceField* field,
                            const CullOptions& opt) {
  if (cloud.empty()) return cloud;

  KdTree3 tree(cloud.positions);
  PointCloud out;
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    if (opt.use_density_gate && field && metric_density(*field, p) < opt.min_density) continue;
    if (opt.use_neighbor_gate) {
      // count_within includes the query point itself.
      int nbrs = tree.count_within(p, opt.radius, opt.min_neighbors + 1) - 1;
      if (nbrs < opt.min_neighbors) continue;
    }
    out.positions.push_back(p);
    if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
    if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
  }
  return out;
}

PointCloud merge_submaps(const std::vector<Submap>& submaps, const MergeOptions& opt) {
  PointCloud merged;
  for (const auto& sm : submaps) {
    PointCloud cloud = opt.cull ? cull_low_density(sm.cloud, sm.field, opt.cull_options) : sm.cloud;
    for (size_t i = 0; i < cloud.size(); ++i) {
      merged.positions.push_back(sm.world_from_local.apply(cloud.positions[i]));
      if (cloud.has_colors()) merged.colors.push_back(cloud.colors[i]);
      if (cloud.has_normals())
        merged.normals.push_back(sm.world_from_local.rotate(cloud.normals[i]));
    }
  }
  if (opt.voxel_size > 0.0) return voxel_downsample(merged, opt.voxel_size);
  return merged;
}

}  // namespace lvnf
