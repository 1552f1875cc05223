#include "lvnf/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lvnf/image_io.hpp"

namespace fs = std::filesystem;

namespace lvnf {

const PinholeCamera& Dataset::camera_of(int frame_index) const {
  return cameras.at(frames[frame_index].camera);
}

Trajectory Dataset::trajectory() const {
  Trajectory t;
  for (const auto& f : frames) t.poses.push_back(f.pose);
  return t;
}

namespace {

ImageF decode_normal_image(const ImageU8& img) {
  ImageF out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      Vec3 n = decode_normal(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      // decode_normal renormalizes; reject near-zero encodings (invalid).
      Vec3 raw(2.0 * (img.at(x, y, 0) / 255.0) - 1.0, 2.0 * (img.at(x, y, 1) / 255.0) - 1.0,
               2.0 * (img.at(x, y, 2) / 255.0) - 1.0);
      if (raw.norm() < 0.5) n = Vec3::Zero();
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = n[c];
    }
  return out;
}

}  // namespace

Dataset load_dataset(const std::string& root) {
  Dataset ds;
  ds.root = root;

  fs::path cam_path = fs::path(root) / "cameras.json";
  std::ifstream cam_in(cam_path);
  if (!cam_in) throw DataError("missing cameras.json in " + root);
  nlohmann::json cams;
  try {
    cam_in >> cams;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed cameras.json in " + root + ": " + e.what());
  }
  for (auto it = cams.begin(); it != cams.end(); ++it) {
    PinholeCamera c;
    c.fx = it.value().at("fx").get<double>();
    c.fy = it.value().at("fy").get<double>();
    c.cx = it.value().at("cx").get<double>();
    c.cy = it.value().at("cy").get<double>();
    c.width = it.value().at("width").get<int>();
    c.height = it.value().at("height").get<int>();
    if (c.fx <= 0 || c.fy <= 0 || c.width <= 0 || c.height <= 0)
      throw DataError("invalid intrinsics for camera '" + it.key() + "' in " + root);
    ds.cameras[it.key()] = c;
  }

  fs::path frames_path = fs::path(root) / "frames.jsonl";
  std::ifstream frames_in(frames_path);
  if (!frames_in) throw DataError("missing frames.jsonl in " + root);
  std::string line;
  int line_no = 0;
  while (std::getline(frames_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed frame record at " + frames_path.string() + ":" +
                      std::to_string(line_no) + ": " + e.what());
    }
    FrameRecord f;
    try {
      f.id = rec.at("id").get<int>();
      f.camera = rec.at("camera").get<std::string>();
      f.timestamp = rec.at("timestamp").get<double>();
      f.image_path = rec.at("image").get<std::string>();
      if (rec.contains("depth")) f.depth_path = rec.at("depth").get<std::string>();
      if (rec.contains("normal")) f.normal_path = rec.at("normal").get<std::string>();
      if (rec.contains("sky")) f.sky_path = rec.at("sky").get<std::string>();
      auto pose = rec.at("pose");
      f.pose.t = Vec3(pose.at(0).get<double>(), pose.at(1).get<double>(), pose.at(2).get<double>());
      f.pose.q = Quat(pose.at(6).get<double>(), pose.at(3).get<double>(),
                      pose.at(4).get<double>(), pose.at(5).get<double>());
      f.split = rec.value("split", "train");
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed frame record at " + frames_path.string() + ":" +
                      std::to_string(line_no) + ": " + e.what());
    }
    if (!ds.cameras.count(f.camera))
      throw DataError("frame " + std::to_string(f.id) + " references unknown camera '" +
                      f.camera + "'");
    if (std::abs(f.pose.q.norm() - 1.0) > 1e-3)
      throw DataError("non-unit pose quaternion for frame " + std::to_string(f.id));
    f.pose.q.normalize();
    f.pose.timestamp = f.timestamp;
    f.pose.frame_id = f.id;
    ds.frames.push_back(std::move(f));
  }
  if (ds.frames.empty()) throw DataError("no frames in " + frames_path.string());

  auto full = [&](const std::string& rel) { return (fs::path(root) / rel).string(); };
  for (size_t i = 0; i < ds.frames.size(); ++i) {
    const FrameRecord& f = ds.frames[i];
    if (!fs::exists(full(f.image_path)))
      throw DataError("missing image file: " + full(f.image_path));
    ds.images.push_back(dequantize_u8(read_png_rgb8(full(f.image_path))));

    if (!f.depth_path.empty()) {
      if (!fs::exists(full(f.depth_path)))
        throw DataError("missing depth file: " + full(f.depth_path));
      ds.depths.push_back(depth_from_mm(read_png_gray16(full(f.depth_path))));
    } else {
      ds.depths.emplace_back();
    }
    if (!f.normal_path.empty()) {
      if (!fs::exists(full(f.normal_path)))
        throw DataError("missing normal file: " + full(f.normal_path));
      ds.normal_images.push_back(decode_normal_image(read_png_rgb8(full(f.normal_path))));
    } else {
      ds.normal_images.emplace_back();
    }
    if (!f.sky_path.empty()) {
      if (!fs::exists(full(f.sky_path)))
        throw DataError("missing sky mask file: " + full(f.sky_path));
      ds.sky_masks.push_back(read_png_gray8(full(f.sky_path)));
    } else {
      ds.sky_masks.emplace_back();
    }

    const PinholeCamera& cam = ds.camera_of(int(i));
    if (ds.images.back().width != cam.width || ds.images.back().height != cam.height)
      throw DataError("image size mismatch for frame " + std::to_string(f.id) + ": " +
                      full(f.image_path));

    if (f.split == "test") ds.test_indices.push_back(int(i));
    else ds.train_indices.push_back(int(i));
  }

  fs::path gt = fs::path(root) / "gt_cloud.ply";
  if (fs::exists(gt)) ds.gt_cloud_path = gt.string();
  return ds;
}

}  // namespace lvnf
