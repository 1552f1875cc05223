#pragma once

#include <string>
#include <vector>

#include "lvnf/types.hpp"

namespace lvnf {

// Similarity transform x' = s * R * x + t with unit-quaternion rotation.
struct Sim3 {
  double s = 1.0;
  Quat q = Quat::Identity();
  Vec3 t = Vec3::Zero();

  static Sim3 identity() { return Sim3{}; }
  static Sim3 translation(const Vec3& v) { return Sim3{1.0, Quat::Identity(), v}; }

  Vec3 apply(const Vec3& p) const { return s * (q * p) + t; }
  Vec3 rotate(const Vec3& v) const { return q * v; }  // directions: scale-free
  Mat3 rotation() const { return q.toRotationMatrix(); }

  Sim3 inverse() const {
    Sim3 inv;
    inv.s = 1.0 / s;
    inv.q = q.conjugate();
    inv.t = -(inv.q * t) / s;
    return inv;
  }

  // (a * b)(x) = a(b(x))
  friend Sim3 operator*(const Sim3& a, const Sim3& b) {
    Sim3 out;
    out.s = a.s * b.s;
    out.q = (a.q * b.q).normalized();
    out.t = a.s * (a.q * b.t) + a.t;
    return out;
  }
};

struct PoseStamped {
  double timestamp = 0.0;
  Quat q = Quat::Identity();  // world-from-camera rotation
  Vec3 t = Vec3::Zero();      // camera center in world
  int frame_id = 0;
};

struct Trajectory {
  std::vector<PoseStamped> poses;

  size_t size() const { return poses.size(); }
  std::vector<Vec3> positions() const {
    std::vector<Vec3> p;
    p.reserve(poses.size());
    for (const auto& e : poses) p.push_back(e.t);
    return p;
  }
};

// Closed-form least-squares Sim(3) mapping src onto dst (Umeyama). Requires
// >= 3 non-collinear source points; throws std::invalid_argument otherwise.
Sim3 umeyama_sim3(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

// Associates poses by nearest timestamp (within max_dt seconds), fits a Sim3
// from the up-to-scale trajectory onto the metric one and applies it to every
// pose. Returns the rescaled trajectory together with the fitted transform.
struct RescaleResult {
  Trajectory trajectory;
  Sim3 transform;
  int associations = 0;
};
RescaleResult rescale_trajectory(const Trajectory& up_to_scale, const Trajectory& metric,
                                 double max_dt = 0.01);

// Plain-text trajectory files: one `timestamp tx ty tz qx qy qz qw` per line.
Trajectory read_trajectory(const std::string& path);
void write_trajectory(const std::string& path, const Trajectory& traj);

}  // namespace lvnf
