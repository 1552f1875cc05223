#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lvnf/dataset.hpp"
#include "lvnf/image_io.hpp"
#include "lvnf/synth.hpp"

using namespace lvnf;
namespace fs = std::filesystem;

namespace {

std::string make_test_dataset(const std::string& dir) {
  SceneSpec s = make_scene("textured-room");
  s.seed = 11;
  s.gt_points_per_m2 = 1.0;
  fs::remove_all(dir);
  generate_dataset(s, dir);
  return dir;
}

}  // namespace

TEST_CASE("synth output loads without error and splits are respected") {
  std::string dir = make_test_dataset("/tmp/lvnf_ds_test");
  Dataset ds = load_dataset(dir);
  CHECK(ds.frames.size() == 12);
  CHECK(ds.test_indices.size() == 2);   // every 6th frame
  CHECK(ds.train_indices.size() == 10);
  for (int i : ds.test_indices) CHECK(ds.frames[i].split == "test");
  CHECK(!ds.gt_cloud_path.empty());
  fs::remove_all(dir);
}

TEST_CASE("depth pixels decode as millimetres over 1000") {
  ImageU16 mm(4, 4, 1, 0);
  mm.at(1, 2) = 2000;
  mm.at(3, 3) = 123;
  ImageF m = depth_from_mm(mm);
  CHECK(m.at(1, 2) == doctest::Approx(2.0));
  CHECK(m.at(3, 3) == doctest::Approx(0.123));
  CHECK(m.at(0, 0) == 0.0);
}

TEST_CASE("load(write(dataset)) preserves numerics within codec quantization") {
  std::string dir = make_test_dataset("/tmp/lvnf_ds_roundtrip");
  Dataset ds = load_dataset(dir);

  // Re-simulate frame 0 and compare against the decoded copies.
  std::ifstream sj(fs::path(dir) / "scene.json");
  std::string text((std::istreambuf_iterator<char>(sj)), std::istreambuf_iterator<char>());
  SceneSpec scene = scene_from_json(text);
  Rng rng(scene.seed);
  SimFrame f = simulate_frame(scene, ds.frames[0].pose, rng);

  const ImageF& img = ds.images[0];
  for (size_t i = 0; i < img.data.size(); i += 17)
    CHECK(std::abs(img.data[i] - f.image.data[i]) <= 0.5 / 255.0 + 1e-12);

  const ImageF& depth = ds.depths[0];
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x)
      CHECK(std::abs(depth.at(x, y) - f.depth.at(x, y)) <= 0.5e-3 + 1e-12);

  const ImageF& normals = ds.normal_images[0];
  for (int y = 0; y < normals.height; ++y)
    for (int x = 0; x < normals.width; ++x) {
      Vec3 truth(f.normal_cam.at(x, y, 0), f.normal_cam.at(x, y, 1), f.normal_cam.at(x, y, 2));
      Vec3 decoded(normals.at(x, y, 0), normals.at(x, y, 1), normals.at(x, y, 2));
      if (truth.norm() < 0.5) {
        CHECK(decoded.norm() == 0.0);
      } else {
        CHECK((decoded - truth).cwiseAbs().maxCoeff() < 2.0 / 127.0);
        CHECK(std::abs(decoded.norm() - 1.0) < 1e-3);
      }
    }
  fs::remove_all(dir);
}

TEST_CASE("missing image file is reported by path") {
  std::string dir = make_test_dataset("/tmp/lvnf_ds_missing");
  fs::remove(fs::path(dir) / "images" / "0003.png");
  try {
    load_dataset(dir);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("0003.png") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("malformed records and bad quaternions are rejected") {
  std::string dir = make_test_dataset("/tmp/lvnf_ds_badq");
  {
    std::ofstream frames(fs::path(dir) / "frames.jsonl");
    frames << R"({"id":0,"camera":"cam0","timestamp":0.0,"image":"images/0000.png",)"
           << R"("pose":[0,0,0,0,0,0,2.0],"split":"train"})" << "\n";
  }
  CHECK_THROWS_AS(load_dataset(dir), DataError);

  {
    std::ofstream frames(fs::path(dir) / "frames.jsonl");
    frames << "{not json}\n";
  }
  CHECK_THROWS_AS(load_dataset(dir), DataError);

  fs::remove(fs::path(dir) / "cameras.json");
  CHECK_THROWS_AS(load_dataset(dir), DataError);
  fs::remove_all(dir);
}

TEST_CASE("16-bit png round-trip is exact") {
  ImageU16 img(32, 16, 1);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = uint16_t((i * 2654435761u) & 0xffff);
  std::string path = "/tmp/lvnf_depth16.png";
  write_png_gray16(path, img);
  ImageU16 back = read_png_gray16(path);
  CHECK(back.data == img.data);
  fs::remove(path);
}

TEST_CASE("8-bit rgb png round-trip is exact") {
  ImageU8 img(17, 9, 3);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = uint8_t((i * 97) & 0xff);
  std::string path = "/tmp/lvnf_rgb8.png";
  write_png_rgb8(path, img);
  ImageU8 back = read_png_rgb8(path);
  CHECK(back.data == img.data);
  fs::remove(path);
}
