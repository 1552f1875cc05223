#pragma once

#include <vector>

#include "lvnf/sim3.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct PinholeCamera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
};

struct Ray {
  Vec3 origin = Vec3::Zero();  // camera center, world frame
  Vec3 dir = Vec3::UnitZ();    // unit, world frame
  double near = 0.1;
  double far = 120.0;
  Vec2i pixel = Vec2i::Zero();
  int frame_id = -1;
};

// Camera-frame bearing for a pixel, unit norm. x right, y down, z forward.
Vec3 pixel_bearing(const PinholeCamera& cam, double u, double v);

// Pixel coordinates of a camera-frame point (z > 0).
Vec2 project(const PinholeCamera& cam, const Vec3& p_cam);

// Rays through the given pixels; pose is world-from-camera. Throws on
// out-of-bounds pixels or invalid intrinsics.
std::vector<Ray> generate_rays(const PinholeCamera& cam, const PoseStamped& pose,
                               const std::vector<Vec2i>& pixels, double near, double far);

// Pose looking from `eye` toward `target` with +z world up.
PoseStamped look_at(const Vec3& eye, const Vec3& target, double timestamp = 0.0,
                    int frame_id = 0);

}  // namespace lvnf
