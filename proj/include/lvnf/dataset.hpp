#pragma once

#include <map>
#include <string>
#include <vector>

#include "lvnf/camera.hpp"
#include "lvnf/sim3.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct FrameRecord {
  int id = 0;
  std::string camera = "cam0";
  double timestamp = 0.0;
  std::string image_path;   // relative to the dataset root
  std::string depth_path;   // optional
  std::string normal_path;  // optional
  std::string sky_path;     // optional
  PoseStamped pose;         // world-from-camera
  std::string split = "train";
};

// In-memory dataset: `cameras.json`, `frames.jsonl`, decoded sensor images.
// Depth decodes as millimetres/1000; normal images as n = 2*(v/255) - 1,
// renormalized, zero vector where invalid.
struct Dataset {
  std::string root;
  std::map<std::string, PinholeCamera> cameras;
  std::vector<FrameRecord> frames;
  std::vector<ImageF> images;         // aligned with frames, rgb in [0,1]
  std::vector<ImageF> depths;         // metres, 0 = no return; may be empty images
  std::vector<ImageF> normal_images;  // unit normals or 0; may be empty images
  std::vector<ImageU8> sky_masks;     // nonzero = sky; may be empty images
  std::string gt_cloud_path;          // empty if absent

  std::vector<int> train_indices;
  std::vector<int> test_indices;

  const PinholeCamera& camera_of(int frame_index) const;
  Trajectory trajectory() const;

  bool has_depth(int frame_index) const { return !depths[frame_index].empty(); }
  bool has_normals(int frame_index) const { return !normal_images[frame_index].empty(); }
  bool has_sky(int frame_index) const { return !sky_masks[frame_index].empty(); }
};

Dataset load_dataset(const std::string& root);

}  // namespace lvnf
