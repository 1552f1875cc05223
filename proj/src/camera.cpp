#include "lvnf/camera.hpp"

#include <cmath>

namespace lvnf {

Vec3 pixel_bearing(const PinholeCamera& cam, double u, double v) {
  Vec3 d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
  return d.normalized();
}

Vec2 project(const PinholeCamera& cam, const Vec3& p) {
  return Vec2(cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy);
}

std::vector<Ray> generate_rays(const PinholeCamera& cam, const PoseStamped& pose,
                               const std::vector<Vec2i>& pixels, double near, double far) {
  if (cam.fx <= 0.0 || cam.fy <= 0.0)
    throw std::invalid_argument("generate_rays: invalid intrinsics (fx, fy must be > 0)");
  if (!(near > 0.0 && near < far))
    throw std::invalid_argument("generate_rays: need 0 < near < far");
  Mat3 R = pose.q.toRotationMatrix();
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (const auto& px : pixels) {
    if (px.x() < 0 || px.x() >= cam.width || px.y() < 0 || px.y() >= cam.height)
      throw std::invalid_argument("generate_rays: pixel out of image bounds");
    Ray r;
    r.origin = pose.t;
    r.dir = (R * pixel_bearing(cam, px.x(), px.y())).normalized();
    r.near = near;
    r.far = far;
    r.pixel = px;
    r.frame_id = pose.frame_id;
    rays.push_back(r);
  }
  return rays;
}

PoseStamped look_at(const Vec3& eye, const Vec3& target, double timestamp, int frame_id) {
  Vec3 forward = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(forward.dot(up)) > 0.999) up = Vec3::UnitY();
  Vec3 right = forward.cross(up).normalized();
  Vec3 down = forward.cross(right).normalized();
  Mat3 R;
  R.col(0) = right;
  R.col(1) = down;
  R.col(2) = forward;
  PoseStamped pose;
  pose.q = Quat(R).normalized();
  pose.t = eye;
  pose.timestamp = timestamp;
  pose.frame_id = frame_id;
  return pose;
}

}  // namespace lvnf
