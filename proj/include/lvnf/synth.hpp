#pragma once

#include <string>
#include <vector>

#include "lvnf/camera.hpp"
#include "lvnf/point_cloud.hpp"
#include "lvnf/rng.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct Texture {
  enum class Type { Uniform, Checker, Image };
  Type type = Type::Uniform;
  Vec3 color0 = Vec3(0.7, 0.7, 0.7);
  Vec3 color1 = Vec3(0.25, 0.25, 0.25);  // checker second color
  double scale = 1.0;                    // checker cell size, metres
  std::string image_path;                // for Type::Image
  ImageF image;                          // loaded copy
};

Vec3 sample_texture(const Texture& tex, double u, double v);

struct Primitive {
  enum class Kind { Rect, Box, Sphere, Cylinder };
  Kind kind = Kind::Rect;

  // Rect: finite plane patch, normal = axis_u x axis_v.
  Vec3 center = Vec3::Zero();
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  double half_u = 1.0, half_v = 1.0;

  // Box: axis-aligned.
  Vec3 box_min = Vec3::Zero();
  Vec3 box_max = Vec3::Ones();

  // Sphere: center + radius. Cylinder: center = base center, +z axis,
  // radius + height (side and caps).
  double radius = 1.0;
  double height = 1.0;

  Texture albedo;
};

struct TrajectoryScript {
  std::vector<Vec3> waypoints;
  std::vector<Vec3> targets;  // per-frame look-at points
};

struct SensorSpec {
  PinholeCamera camera;
  int lidar_stride = 4;          // lidar depth on every Nth pixel (both axes)
  double lidar_sigma = 0.02;     // range noise std, metres
  double lidar_max_range = 50.0;
};

struct SceneSpec {
  std::string name = "custom";
  std::vector<Primitive> primitives;
  Vec3 light_dir = Vec3(0.3, -0.25, -0.9).normalized();
  double ambient = 0.35;
  Vec3 sky_color = Vec3(0.65, 0.78, 0.95);
  TrajectoryScript script;
  SensorSpec sensor;
  uint64_t seed = 0;
  double gt_points_per_m2 = 150.0;
  int test_every = 0;             // every Nth frame goes to the test split
  bool normals_from_range = false;  // range-image normals instead of analytic
};

struct Hit {
  bool hit = false;
  double t = 0.0;
  Vec3 normal = Vec3::Zero();  // oriented toward the ray origin
  Vec3 albedo = Vec3::Zero();
};

// Nearest positive intersection over all primitives; miss = sky.
Hit raycast(const Vec3& origin, const Vec3& dir, const SceneSpec& scene);

struct SimFrame {
  ImageF image;       // shaded color, 3ch
  ImageF depth;       // lidar range (m) on the lidar subgrid, 0 elsewhere
  ImageF normal_cam;  // camera-frame surface normal where depth valid, else 0
  ImageU8 sky;        // 255 = sky
};

SimFrame simulate_frame(const SceneSpec& scene, const PoseStamped& pose, Rng& rng);

// Normals from central differences of back-projected range-image neighbors at
// +-stride, oriented toward the sensor; zero where any neighbor is missing.
ImageF lidar_normals_from_range(const ImageF& range, const PinholeCamera& cam, int stride = 1);

// Uniform area-weighted surface sampling of all primitives.
PointCloud sample_ground_truth(const SceneSpec& scene, Rng& rng);

// Writes the full dataset layout: cameras.json, frames.jsonl, images/, depth/,
// normals/, sky/, trajectory.txt (+ a Sim3-perturbed copy), gt_cloud.ply and
// scene.json.
void generate_dataset(const SceneSpec& scene, const std::string& out_dir);

std::vector<std::string> builtin_scene_names();
SceneSpec make_scene(const std::string& name);

std::string scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const std::string& text);

}  // namespace lvnf
