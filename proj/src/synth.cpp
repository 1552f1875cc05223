#include "lvnf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lvnf/image_io.hpp"
#include "lvnf/sim3.hpp"

namespace fs = std::filesystem;

namespace lvnf {

Vec3 sample_texture(const Texture& tex, double u, double v) {
  switch (tex.type) {
    case Texture::Type::Uniform:
      return tex.color0;
    case Texture::Type::Checker: {
      double su = u / tex.scale, sv = v / tex.scale;
      int parity = (int(std::floor(su)) + int(std::floor(sv))) & 1;
      return parity ? tex.color1 : tex.color0;
    }
    case Texture::Type::Image: {
      if (tex.image.empty()) return tex.color0;
      double fu = u / tex.scale - std::floor(u / tex.scale);
      double fv = v / tex.scale - std::floor(v / tex.scale);
      double x = fu * (tex.image.width - 1);
      double y = fv * (tex.image.height - 1);
      int x0 = int(x), y0 = int(y);
      int x1 = std::min(x0 + 1, tex.image.width - 1);
      int y1 = std::min(y0 + 1, tex.image.height - 1);
      double ax = x - x0, ay = y - y0;
      Vec3 out;
      for (int c = 0; c < 3; ++c) {
        double top = (1 - ax) * tex.image.at(x0, y0, c) + ax * tex.image.at(x1, y0, c);
        double bot = (1 - ax) * tex.image.at(x0, y1, c) + ax * tex.image.at(x1, y1, c);
        out[c] = (1 - ay) * top + ay * bot;
      }
      return out;
    }
  }
  return tex.color0;
}

namespace {

constexpr double kRayEps = 1e-9;

struct LocalHit {
  double t = 0.0;
  Vec3 normal = Vec3::Zero();  // geometric normal (any orientation)
  double u = 0.0, v = 0.0;     // texture coordinates
  bool hit = false;
};

LocalHit intersect_rect(const Vec3& o, const Vec3& d, const Primitive& p) {
  LocalHit h;
  Vec3 n = p.axis_u.cross(p.axis_v).normalized();
  double denom = d.dot(n);
  if (std::abs(denom) < 1e-12) return h;
  double t = (p.center - o).dot(n) / denom;
  if (t <= kRayEps) return h;
  Vec3 q = o + t * d - p.center;
  double u = q.dot(p.axis_u), v = q.dot(p.axis_v);
  if (std::abs(u) > p.half_u || std::abs(v) > p.half_v) return h;
  h.hit = true;
  h.t = t;
  h.normal = n;
  h.u = u;
  h.v = v;
  return h;
}

LocalHit intersect_box(const Vec3& o, const Vec3& d, const Primitive& p) {
  LocalHit h;
  double t0 = -1e300, t1 = 1e300;
  int axis0 = -1, axis1 = -1;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < p.box_min[k] || o[k] > p.box_max[k]) return h;
      continue;
    }
    double ta = (p.box_min[k] - o[k]) / d[k];
    double tb = (p.box_max[k] - o[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    if (ta > t0) {
      t0 = ta;
      axis0 = k;
    }
    if (tb < t1) {
      t1 = tb;
      axis1 = k;
    }
  }
  if (t0 > t1) return h;
  double t;
  int axis;
  if (t0 > kRayEps) {
    t = t0;
    axis = axis0;
  } else if (t1 > kRayEps) {
    t = t1;
    axis = axis1;
  } else {
    return h;
  }
  Vec3 q = o + t * d;
  h.hit = true;
  h.t = t;
  h.normal = Vec3::Zero();
  h.normal[axis] = d[axis] > 0.0 ? -1.0 : 1.0;
  // Face-local texture coordinates from the other two axes.
  int a = (axis + 1) % 3, b = (axis + 2) % 3;
  h.u = q[a];
  h.v = q[b];
  return h;
}

LocalHit intersect_sphere(const Vec3& o, const Vec3& d, const Primitive& p) {
  LocalHit h;
  Vec3 oc = o - p.center;
  double b = oc.dot(d);
  double c = oc.squaredNorm() - p.radius * p.radius;
  double disc = b * b - c;
  if (disc < 0.0) return h;
  double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t <= kRayEps) t = -b + sq;
  if (t <= kRayEps) return h;
  Vec3 q = o + t * d;
  h.hit = true;
  h.t = t;
  h.normal = (q - p.center).normalized();
  h.u = std::atan2(h.normal.y(), h.normal.x()) * p.radius;
  h.v = std::acos(std::clamp(h.normal.z(), -1.0, 1.0)) * p.radius;
  return h;
}

LocalHit intersect_cylinder(const Vec3& o, const Vec3& d, const Primitive& p) {
  LocalHit best;
  double z0 = p.center.z(), z1 = p.center.z() + p.height;

  // Side surface.
  double ox = o.x() - p.center.x(), oy = o.y() - p.center.y();
  double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    double b = ox * d.x() + oy * d.y();
    double c = ox * ox + oy * oy - p.radius * p.radius;
    double disc = b * b - a * c;
    if (disc >= 0.0) {
      double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / a, (-b + sq) / a}) {
        if (t <= kRayEps) continue;
        Vec3 q = o + t * d;
        if (q.z() < z0 || q.z() > z1) continue;
        if (!best.hit || t < best.t) {
          best.hit = true;
          best.t = t;
          best.normal = Vec3(q.x() - p.center.x(), q.y() - p.center.y(), 0.0).normalized();
          best.u = std::atan2(q.y() - p.center.y(), q.x() - p.center.x()) * p.radius;
          best.v = q.z() - z0;
        }
        break;  // nearest positive root on the side
      }
    }
  }
  // Caps.
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {z0, z1}) {
      double t = (zc - o.z()) / d.z();
      if (t <= kRayEps) continue;
      Vec3 q = o + t * d;
      double r2 = (q.x() - p.center.x()) * (q.x() - p.center.x()) +
                  (q.y() - p.center.y()) * (q.y() - p.center.y());
      if (r2 > p.radius * p.radius) continue;
      if (!best.hit || t < best.t) {
        best.hit = true;
        best.t = t;
        best.normal = Vec3(0, 0, zc == z0 ? -1.0 : 1.0);
        best.u = q.x() - p.center.x();
        best.v = q.y() - p.center.y();
      }
    }
  }
  return best;
}

LocalHit intersect(const Vec3& o, const Vec3& d, const Primitive& p) {
  switch (p.kind) {
    case Primitive::Kind::Rect: return intersect_rect(o, d, p);
    case Primitive::Kind::Box: return intersect_box(o, d, p);
    case Primitive::Kind::Sphere: return intersect_sphere(o, d, p);
    case Primitive::Kind::Cylinder: return intersect_cylinder(o, d, p);
  }
  return {};
}

Vec3 shade(const SceneSpec& scene, const Vec3& albedo, const Vec3& facing_normal) {
  double diffuse = std::max(0.0, facing_normal.dot(-scene.light_dir));
  Vec3 c = albedo * (scene.ambient + (1.0 - scene.ambient) * diffuse);
  return c.cwiseMin(1.0).cwiseMax(0.0);
}

}  // namespace

Hit raycast(const Vec3& origin, const Vec3& dir, const SceneSpec& scene) {
  Hit out;
  double best_t = 1e300;
  for (const auto& prim : scene.primitives) {
    LocalHit h = intersect(origin, dir, prim);
    if (h.hit && h.t < best_t) {
      best_t = h.t;
      out.hit = true;
      out.t = h.t;
      Vec3 n = h.normal;
      if (n.dot(dir) > 0.0) n = -n;  // face the sensor
      out.normal = n;
      out.albedo = sample_texture(prim.albedo, h.u, h.v);
    }
  }
  return out;
}

SimFrame simulate_frame(const SceneSpec& scene, const PoseStamped& pose, Rng& rng) {
  const PinholeCamera& cam = scene.sensor.camera;
  SimFrame f;
  f.image = ImageF(cam.width, cam.height, 3);
  f.depth = ImageF(cam.width, cam.height, 1);
  f.normal_cam = ImageF(cam.width, cam.height, 3);
  f.sky = ImageU8(cam.width, cam.height, 1, 0);

  Mat3 R = pose.q.toRotationMatrix();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      Vec3 dir = (R * pixel_bearing(cam, x, y)).normalized();
      Hit h = raycast(pose.t, dir, scene);
      if (!h.hit) {
        for (int c = 0; c < 3; ++c) f.image.at(x, y, c) = scene.sky_color[c];
        f.sky.at(x, y) = 255;
        continue;
      }
      Vec3 color = shade(scene, h.albedo, h.normal);
      for (int c = 0; c < 3; ++c) f.image.at(x, y, c) = color[c];

      const bool lidar_pixel =
          x % scene.sensor.lidar_stride == 0 && y % scene.sensor.lidar_stride == 0;
      if (lidar_pixel && h.t <= scene.sensor.lidar_max_range) {
        double d = h.t;
        if (scene.sensor.lidar_sigma > 0.0) d += scene.sensor.lidar_sigma * rng.normal();
        f.depth.at(x, y) = std::max(d, 1e-3);
        Vec3 n_cam = R.transpose() * h.normal;
        for (int c = 0; c < 3; ++c) f.normal_cam.at(x, y, c) = n_cam[c];
      }
    }
  }

  if (scene.normals_from_range) {
    f.normal_cam = lidar_normals_from_range(f.depth, cam, scene.sensor.lidar_stride);
  }
  return f;
}

ImageF lidar_normals_from_range(const ImageF& range, const PinholeCamera& cam, int stride) {
  ImageF out(range.width, range.height, 3);
  auto valid = [&](int x, int y) {
    return x >= 0 && x < range.width && y >= 0 && y < range.height && range.at(x, y) > 0.0;
  };
  auto backproject = [&](int x, int y) { return Vec3(range.at(x, y) * pixel_bearing(cam, x, y)); };

  for (int y = 0; y < range.height; ++y) {
    for (int x = 0; x < range.width; ++x) {
      if (!valid(x, y)) continue;
      if (!valid(x - stride, y) || !valid(x + stride, y) || !valid(x, y - stride) ||
          !valid(x, y + stride))
        continue;
      Vec3 dh = backproject(x + stride, y) - backproject(x - stride, y);
      Vec3 dv = backproject(x, y + stride) - backproject(x, y - stride);
      Vec3 n = dh.cross(dv);
      double len = n.norm();
      if (len < 1e-12) continue;
      n /= len;
      if (n.dot(pixel_bearing(cam, x, y)) > 0.0) n = -n;  // toward the sensor
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = n[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground-truth sampling

namespace {

double primitive_area(const Primitive& p) {
  switch (p.kind) {
    case Primitive::Kind::Rect:
      return 4.0 * p.half_u * p.half_v;
    case Primitive::Kind::Box: {
      Vec3 e = p.box_max - p.box_min;
      return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.x() * e.z());
    }
    case Primitive::Kind::Sphere:
      return 4.0 * M_PI * p.radius * p.radius;
    case Primitive::Kind::Cylinder:
      return 2.0 * M_PI * p.radius * p.height + 2.0 * M_PI * p.radius * p.radius;
  }
  return 0.0;
}

void sample_primitive(const Primitive& p, int count, Rng& rng, PointCloud& cloud) {
  for (int i = 0; i < count; ++i) {
    Vec3 pos, normal;
    double u = 0.0, v = 0.0;
    switch (p.kind) {
      case Primitive::Kind::Rect: {
        u = rng.uniform(-p.half_u, p.half_u);
        v = rng.uniform(-p.half_v, p.half_v);
        pos = p.center + u * p.axis_u + v * p.axis_v;
        normal = p.axis_u.cross(p.axis_v).normalized();
        break;
      }
      case Primitive::Kind::Box: {
        Vec3 e = p.box_max - p.box_min;
        double faces[6] = {e.y() * e.z(), e.y() * e.z(), e.x() * e.z(),
                           e.x() * e.z(), e.x() * e.y(), e.x() * e.y()};
        double total = 0.0;
        for (double f : faces) total += f;
        double pick = rng.uniform(0.0, total);
        int face = 0;
        for (; face < 5; ++face) {
          if (pick < faces[face]) break;
          pick -= faces[face];
        }
        int axis = face / 2;
        bool high = face % 2;
        pos = p.box_min + Vec3(rng.uniform() * e.x(), rng.uniform() * e.y(),
                               rng.uniform() * e.z());
        pos[axis] = high ? p.box_max[axis] : p.box_min[axis];
        normal = Vec3::Zero();
        normal[axis] = high ? 1.0 : -1.0;
        int a = (axis + 1) % 3, b = (axis + 2) % 3;
        u = pos[a];
        v = pos[b];
        break;
      }
      case Primitive::Kind::Sphere: {
        Vec3 n = rng.unit_vec3();
        pos = p.center + p.radius * n;
        normal = n;
        u = std::atan2(n.y(), n.x()) * p.radius;
        v = std::acos(std::clamp(n.z(), -1.0, 1.0)) * p.radius;
        break;
      }
      case Primitive::Kind::Cylinder: {
        double side = 2.0 * M_PI * p.radius * p.height;
        double cap = M_PI * p.radius * p.radius;
        double pick = rng.uniform(0.0, side + 2.0 * cap);
        if (pick < side) {
          double ang = rng.uniform(0.0, 2.0 * M_PI);
          double z = rng.uniform(0.0, p.height);
          normal = Vec3(std::cos(ang), std::sin(ang), 0.0);
          pos = p.center + Vec3(p.radius * std::cos(ang), p.radius * std::sin(ang), z);
          u = ang * p.radius;
          v = z;
        } else {
          bool top = pick >= side + cap;
          double r = p.radius * std::sqrt(rng.uniform());
          double ang = rng.uniform(0.0, 2.0 * M_PI);
          normal = Vec3(0, 0, top ? 1.0 : -1.0);
          pos = p.center + Vec3(r * std::cos(ang), r * std::sin(ang), top ? p.height : 0.0);
          u = r * std::cos(ang);
          v = r * std::sin(ang);
        }
        break;
      }
    }
    Vec3 albedo = sample_texture(p.albedo, u, v);
    cloud.positions.push_back(pos);
    cloud.colors.push_back({to_u8(albedo.x()), to_u8(albedo.y()), to_u8(albedo.z())});
    cloud.normals.push_back(normal);
  }
}

}  // namespace

PointCloud sample_ground_truth(const SceneSpec& scene, Rng& rng) {
  PointCloud cloud;
  for (const auto& p : scene.primitives) {
    int count = std::max(1, int(std::lround(primitive_area(p) * scene.gt_points_per_m2)));
    sample_primitive(p, count, rng, cloud);
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Scene JSON

namespace {

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec3_from(const nlohmann::json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

nlohmann::json texture_json(const Texture& t) {
  nlohmann::json j;
  j["type"] = t.type == Texture::Type::Uniform ? "uniform"
              : t.type == Texture::Type::Checker ? "checker" : "image";
  j["color0"] = vec3_json(t.color0);
  j["color1"] = vec3_json(t.color1);
  j["scale"] = t.scale;
  if (!t.image_path.empty()) j["image"] = t.image_path;
  return j;
}

Texture texture_from(const nlohmann::json& j) {
  Texture t;
  std::string type = j.at("type").get<std::string>();
  t.type = type == "uniform" ? Texture::Type::Uniform
           : type == "checker" ? Texture::Type::Checker : Texture::Type::Image;
  t.color0 = vec3_from(j.at("color0"));
  t.color1 = vec3_from(j.at("color1"));
  t.scale = j.at("scale").get<double>();
  if (j.contains("image")) {
    t.image_path = j.at("image").get<std::string>();
    t.image = dequantize_u8(read_png_rgb8(t.image_path));
  }
  return t;
}

}  // namespace

std::string scene_to_json(const SceneSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["light_dir"] = vec3_json(s.light_dir);
  j["ambient"] = s.ambient;
  j["sky_color"] = vec3_json(s.sky_color);
  j["seed"] = s.seed;
  j["gt_points_per_m2"] = s.gt_points_per_m2;
  j["test_every"] = s.test_every;
  j["normals_from_range"] = s.normals_from_range;
  auto& sensor = j["sensor"];
  sensor["fx"] = s.sensor.camera.fx;
  sensor["fy"] = s.sensor.camera.fy;
  sensor["cx"] = s.sensor.camera.cx;
  sensor["cy"] = s.sensor.camera.cy;
  sensor["width"] = s.sensor.camera.width;
  sensor["height"] = s.sensor.camera.height;
  sensor["lidar_stride"] = s.sensor.lidar_stride;
  sensor["lidar_sigma"] = s.sensor.lidar_sigma;
  sensor["lidar_max_range"] = s.sensor.lidar_max_range;
  j["waypoints"] = nlohmann::json::array();
  j["targets"] = nlohmann::json::array();
  for (const auto& w : s.script.waypoints) j["waypoints"].push_back(vec3_json(w));
  for (const auto& t : s.script.targets) j["targets"].push_back(vec3_json(t));
  j["primitives"] = nlohmann::json::array();
  for (const auto& p : s.primitives) {
    nlohmann::json pj;
    switch (p.kind) {
      case Primitive::Kind::Rect:
        pj["kind"] = "rect";
        pj["center"] = vec3_json(p.center);
        pj["axis_u"] = vec3_json(p.axis_u);
        pj["axis_v"] = vec3_json(p.axis_v);
        pj["half_u"] = p.half_u;
        pj["half_v"] = p.half_v;
        break;
      case Primitive::Kind::Box:
        pj["kind"] = "box";
        pj["min"] = vec3_json(p.box_min);
        pj["max"] = vec3_json(p.box_max);
        break;
      case Primitive::Kind::Sphere:
        pj["kind"] = "sphere";
        pj["center"] = vec3_json(p.center);
        pj["radius"] = p.radius;
        break;
      case Primitive::Kind::Cylinder:
        pj["kind"] = "cylinder";
        pj["center"] = vec3_json(p.center);
        pj["radius"] = p.radius;
        pj["height"] = p.height;
        break;
    }
    pj["albedo"] = texture_json(p.albedo);
    j["primitives"].push_back(pj);
  }
  return j.dump(2);
}

SceneSpec scene_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scene json: ") + e.what());
  }
  SceneSpec s;
  s.name = j.at("name").get<std::string>();
  s.light_dir = vec3_from(j.at("light_dir"));
  s.ambient = j.at("ambient").get<double>();
  s.sky_color = vec3_from(j.at("sky_color"));
  s.seed = j.at("seed").get<uint64_t>();
  s.gt_points_per_m2 = j.at("gt_points_per_m2").get<double>();
  s.test_every = j.at("test_every").get<int>();
  s.normals_from_range = j.at("normals_from_range").get<bool>();
  const auto& sensor = j.at("sensor");
  s.sensor.camera.fx = sensor.at("fx").get<double>();
  s.sensor.camera.fy = sensor.at("fy").get<double>();
  s.sensor.camera.cx = sensor.at("cx").get<double>();
  s.sensor.camera.cy = sensor.at("cy").get<double>();
  s.sensor.camera.width = sensor.at("width").get<int>();
  s.sensor.camera.height = sensor.at("height").get<int>();
  s.sensor.lidar_stride = sensor.at("lidar_stride").get<int>();
  s.sensor.lidar_sigma = sensor.at("lidar_sigma").get<double>();
  s.sensor.lidar_max_range = sensor.at("lidar_max_range").get<double>();
  for (const auto& w : j.at("waypoints")) s.script.waypoints.push_back(vec3_from(w));
  for (const auto& t : j.at("targets")) s.script.targets.push_back(vec3_from(t));
  for (const auto& pj : j.at("primitives")) {
    Primitive p;
    std::string kind = pj.at("kind").get<std::string>();
    if (kind == "rect") {
      p.kind = Primitive::Kind::Rect;
      p.center = vec3_from(pj.at("center"));
      p.axis_u = vec3_from(pj.at("axis_u"));
      p.axis_v = vec3_from(pj.at("axis_v"));
      p.half_u = pj.at("half_u").get<double>();
      p.half_v = pj.at("half_v").get<double>();
    } else if (kind == "box") {
      p.kind = Primitive::Kind::Box;
      p.box_min = vec3_from(pj.at("min"));
      p.box_max = vec3_from(pj.at("max"));
    } else if (kind == "sphere") {
      p.kind = Primitive::Kind::Sphere;
      p.center = vec3_from(pj.at("center"));
      p.radius = pj.at("radius").get<double>();
    } else if (kind == "cylinder") {
      p.kind = Primitive::Kind::Cylinder;
      p.center = vec3_from(pj.at("center"));
      p.radius = pj.at("radius").get<double>();
      p.height = pj.at("height").get<double>();
    } else {
      throw DataError("unknown primitive kind: " + kind);
    }
    p.albedo = texture_from(pj.at("albedo"));
    s.primitives.push_back(p);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Dataset generation

void generate_dataset(const SceneSpec& scene, const std::string& out_dir) {
  if (scene.script.waypoints.size() != scene.script.targets.size() ||
      scene.script.waypoints.empty())
    throw std::invalid_argument("generate_dataset: waypoints/targets mismatch or empty");

  fs::create_directories(out_dir);
  for (const char* sub : {"images", "depth", "normals", "sky"})
    fs::create_directories(fs::path(out_dir) / sub);

  Rng rng(scene.seed);
  const int n = int(scene.script.waypoints.size());

  nlohmann::json cameras;
  cameras["cam0"] = {{"fx", scene.sensor.camera.fx}, {"fy", scene.sensor.camera.fy},
                     {"cx", scene.sensor.camera.cx}, {"cy", scene.sensor.camera.cy},
                     {"width", scene.sensor.camera.width},
                     {"height", scene.sensor.camera.height}};
  {
    std::ofstream os(fs::path(out_dir) / "cameras.json");
    if (!os) throw DataError("cannot write cameras.json in " + out_dir);
    os << cameras.dump(2) << "\n";
  }

  Trajectory traj;
  std::ofstream frames(fs::path(out_dir) / "frames.jsonl");
  if (!frames) throw DataError("cannot write frames.jsonl in " + out_dir);

  char name[64];
  for (int i = 0; i < n; ++i) {
    PoseStamped pose =
        look_at(scene.script.waypoints[i], scene.script.targets[i], 0.1 * i, i);
    traj.poses.push_back(pose);

    SimFrame f = simulate_frame(scene, pose, rng);
    std::snprintf(name, sizeof(name), "%04d.png", i);
    std::string img_rel = std::string("images/") + name;
    std::string depth_rel = std::string("depth/") + name;
    std::string normal_rel = std::string("normals/") + name;
    std::string sky_rel = std::string("sky/") + name;
    write_png_rgb8((fs::path(out_dir) / img_rel).string(), quantize_u8(f.image));
    write_png_gray16((fs::path(out_dir) / depth_rel).string(), depth_to_mm(f.depth));
    write_png_rgb8((fs::path(out_dir) / normal_rel).string(), encode_normals(f.normal_cam));
    write_png_gray8((fs::path(out_dir) / sky_rel).string(), f.sky);

    bool is_test = scene.test_every > 0 && (i % scene.test_every) == scene.test_every - 1;
    nlohmann::json rec;
    rec["id"] = i;
    rec["camera"] = "cam0";
    rec["timestamp"] = pose.timestamp;
    rec["image"] = img_rel;
    rec["depth"] = depth_rel;
    rec["normal"] = normal_rel;
    rec["sky"] = sky_rel;
    rec["pose"] = {pose.t.x(), pose.t.y(), pose.t.z(),
                   pose.q.x(), pose.q.y(), pose.q.z(), pose.q.w()};
    rec["split"] = is_test ? "test" : "train";
    frames << rec.dump() << "\n";
  }
  frames.close();

  write_trajectory((fs::path(out_dir) / "trajectory.txt").string(), traj);

  // A Sim(3)-perturbed copy standing in for an up-to-scale SfM result.
  Sim3 perturb;
  perturb.s = 0.5 + rng.uniform();
  perturb.q = Quat(Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), rng.unit_vec3())).normalized();
  perturb.t = rng.uniform_vec3(-5.0, 5.0);
  Sim3 inv = perturb.inverse();
  Trajectory up_to_scale = traj;
  for (auto& p : up_to_scale.poses) {
    p.t = inv.apply(p.t);
    p.q = (inv.q * p.q).normalized();
  }
  write_trajectory((fs::path(out_dir) / "trajectory_up_to_scale.txt").string(), up_to_scale);

  PointCloud gt = sample_ground_truth(scene, rng);
  write_ply((fs::path(out_dir) / "gt_cloud.ply").string(), gt);

  std::ofstream sj(fs::path(out_dir) / "scene.json");
  if (!sj) throw DataError("cannot write scene.json in " + out_dir);
  sj << scene_to_json(scene) << "\n";
}

// ---------------------------------------------------------------------------
// Built-in scenes

namespace {

Primitive rect(const Vec3& center, const Vec3& u, const Vec3& v, double hu, double hv,
               Texture albedo) {
  Primitive p;
  p.kind = Primitive::Kind::Rect;
  p.center = center;
  p.axis_u = u.normalized();
  p.axis_v = v.normalized();
  p.half_u = hu;
  p.half_v = hv;
  p.albedo = std::move(albedo);
  return p;
}

Texture uniform_tex(const Vec3& c) {
  Texture t;
  t.type = Texture::Type::Uniform;
  t.color0 = c;
  return t;
}

Texture checker_tex(const Vec3& a, const Vec3& b, double scale) {
  Texture t;
  t.type = Texture::Type::Checker;
  t.color0 = a;
  t.color1 = b;
  t.scale = scale;
  return t;
}

PinholeCamera default_camera(int res) {
  PinholeCamera cam;
  cam.width = cam.height = res;
  cam.fx = cam.fy = res / (2.0 * std::tan(35.0 * M_PI / 180.0));  // 70 deg fov
  cam.cx = (res - 1) / 2.0;
  cam.cy = (res - 1) / 2.0;
  return cam;
}

SceneSpec corridor_scene() {
  SceneSpec s;
  s.name = "textureless-corridor";
  Vec3 grey(0.72, 0.72, 0.72);
  s.primitives.push_back(rect({7, 0, 0}, Vec3::UnitX(), Vec3::UnitY(), 7.0, 2.0, uniform_tex(grey)));
  s.primitives.push_back(
      rect({7, -2, 1.5}, Vec3::UnitX(), Vec3::UnitZ(), 7.0, 1.5, uniform_tex(grey)));
  s.primitives.push_back(
      rect({7, 2, 1.5}, Vec3::UnitX(), Vec3::UnitZ(), 7.0, 1.5, uniform_tex(grey)));
  s.primitives.push_back(
      rect({14, 0, 1.5}, Vec3::UnitY(), Vec3::UnitZ(), 2.0, 1.5, uniform_tex(grey)));
  for (int i = 0; i < 10; ++i) {
    s.script.waypoints.push_back(Vec3(1.0 + 0.8 * i, 0.0, 1.3));
    s.script.targets.push_back(Vec3(14.0, 0.0, 1.3));
  }
  s.sensor.camera = default_camera(64);
  return s;
}

SceneSpec room_scene() {
  SceneSpec s;
  s.name = "textured-room";
  s.primitives.push_back(rect({0, 0, 0}, Vec3::UnitX(), Vec3::UnitY(), 4.0, 4.0,
                              checker_tex({0.85, 0.82, 0.75}, {0.35, 0.32, 0.3}, 1.0)));
  Texture wall_a = checker_tex({0.8, 0.45, 0.35}, {0.9, 0.85, 0.8}, 1.0);
  Texture wall_b = checker_tex({0.35, 0.5, 0.75}, {0.85, 0.88, 0.9}, 1.0);
  s.primitives.push_back(rect({4, 0, 1.5}, Vec3::UnitY(), Vec3::UnitZ(), 4.0, 1.5, wall_a));
  s.primitives.push_back(rect({-4, 0, 1.5}, Vec3::UnitY(), Vec3::UnitZ(), 4.0, 1.5, wall_a));
  s.primitives.push_back(rect({0, 4, 1.5}, Vec3::UnitX(), Vec3::UnitZ(), 4.0, 1.5, wall_b));
  s.primitives.push_back(rect({0, -4, 1.5}, Vec3::UnitX(), Vec3::UnitZ(), 4.0, 1.5, wall_b));
  const int n = 12;
  for (int i = 0; i < n; ++i) {
    double ang = 2.0 * M_PI * i / n;
    Vec3 eye(2.2 * std::cos(ang), 2.2 * std::sin(ang), 1.5);
    Vec3 out_dir(std::cos(ang), std::sin(ang), 0.0);
    // Aim at the wall top so the upper image rows see sky.
    s.script.waypoints.push_back(eye);
    s.script.targets.push_back(eye + 3.0 * out_dir + Vec3(0, 0, 1.4));
  }
  s.sensor.camera = default_camera(64);
  s.test_every = 6;
  return s;
}

SceneSpec two_courts_scene() {
  SceneSpec s;
  s.name = "two-courts";
  auto add_court = [&](const Vec3& base, const Texture& floor_tex) {
    Primitive floor = rect(base, Vec3::UnitX(), Vec3::UnitY(), 6.0, 6.0, floor_tex);
    s.primitives.push_back(floor);
    Primitive box;
    box.kind = Primitive::Kind::Box;
    box.box_min = base + Vec3(-3.0, -3.0, 0.0);
    box.box_max = base + Vec3(-1.8, -1.6, 1.1);
    box.albedo = checker_tex({0.75, 0.6, 0.3}, {0.4, 0.3, 0.2}, 0.5);
    s.primitives.push_back(box);
    Primitive box2 = box;
    box2.box_min = base + Vec3(1.6, 1.8, 0.0);
    box2.box_max = base + Vec3(2.8, 3.0, 0.8);
    box2.albedo = checker_tex({0.3, 0.55, 0.65}, {0.8, 0.8, 0.75}, 0.5);
    s.primitives.push_back(box2);
  };
  add_court(Vec3(0, 0, 0), checker_tex({0.8, 0.75, 0.65}, {0.4, 0.38, 0.35}, 1.5));
  add_court(Vec3(100, 0, 0), checker_tex({0.65, 0.75, 0.6}, {0.3, 0.4, 0.3}, 1.5));
  // Thin poles in front of the first court's boxes.
  for (int i = 0; i < 5; ++i) {
    Primitive pole;
    pole.kind = Primitive::Kind::Cylinder;
    pole.center = Vec3(-1.2 + 0.6 * i, 1.5, 0.0);
    pole.radius = 0.1;
    pole.height = 1.5;
    pole.albedo = uniform_tex({0.85, 0.2, 0.15});
    s.primitives.push_back(pole);
  }
  auto orbit = [&](const Vec3& base, int frames) {
    for (int i = 0; i < frames; ++i) {
      double ang = 2.0 * M_PI * i / frames;
      Vec3 eye = base + Vec3(3.6 * std::cos(ang), 3.6 * std::sin(ang), 2.0);
      s.script.waypoints.push_back(eye);
      s.script.targets.push_back(base + Vec3(0, 0, 0.6));
    }
  };
  orbit(Vec3(0, 0, 0), 8);
  orbit(Vec3(100, 0, 0), 8);
  s.sensor.camera = default_camera(64);
  return s;
}

SceneSpec plane_scene() {
  SceneSpec s;
  s.name = "plane";
  s.primitives.push_back(rect({2, 0, 0}, Vec3::UnitY(), Vec3::UnitZ(), 3.0, 2.0,
                              checker_tex({0.85, 0.8, 0.7}, {0.3, 0.35, 0.4}, 0.5)));
  const double offs[6][2] = {{0, 0}, {0.3, 0.15}, {-0.3, 0.15}, {0.3, -0.15}, {-0.3, -0.15}, {0, 0.25}};
  for (auto& o : offs) {
    s.script.waypoints.push_back(Vec3(0.0, o[0], o[1]));
    s.script.targets.push_back(Vec3(2.0, o[0], o[1]));  // fronto-parallel views
  }
  s.sensor.camera = default_camera(64);
  return s;
}

}  // namespace

std::vector<std::string> builtin_scene_names() {
  return {"textureless-corridor", "textured-room", "two-courts", "plane"};
}

SceneSpec make_scene(const std::string& name) {
  if (name == "textureless-corridor") return corridor_scene();
  if (name == "textured-room") return room_scene();
  if (name == "two-courts") return two_courts_scene();
  if (name == "plane") return plane_scene();
  throw std::invalid_argument("unknown scene: " + name);
}

}  // namespace lvnf
