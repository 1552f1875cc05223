#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "lvnf/metrics.hpp"
#include "lvnf/rendering.hpp"
#include "lvnf/synth.hpp"
#include "lvnf/trainer.hpp"

using namespace lvnf;
using namespace lvnf::testutil;
namespace fs = std::filesystem;

namespace {

// Small, fast training setup shared by the toy-scene tests.
TrainConfig toy_train_config() {
  TrainConfig cfg;
  cfg.field.grid.levels = 5;
  cfg.field.grid.base_res = 16;
  cfg.field.grid.max_res = 128;
  cfg.field.grid.table_size = 1 << 13;
  cfg.field.grid.feat = 2;
  cfg.field.geo_dim = 7;
  cfg.field.density_hidden = {16};
  cfg.field.color_hidden = {16};
  cfg.field.appearance_dim = 4;
  cfg.field.dir_frequencies = 2;
  cfg.rays_per_iteration = 128;
  cfg.n_coarse = 16;
  cfg.n_fine = 16;
  cfg.near = 0.1;
  cfg.far = 6.0;
  cfg.log_interval = 25;
  cfg.seed = 5;
  return cfg;
}

Dataset plane_dataset(const std::string& dir, int res = 32) {
  SceneSpec s = make_scene("plane");
  s.seed = 3;
  s.gt_points_per_m2 = 300.0;
  s.script.waypoints.resize(4);  // "4 views"
  s.script.targets.resize(4);
  double f = double(res) / s.sensor.camera.width;
  s.sensor.camera.fx *= f;
  s.sensor.camera.fy *= f;
  s.sensor.camera.width = s.sensor.camera.height = res;
  s.sensor.camera.cx = s.sensor.camera.cy = (res - 1) / 2.0;
  fs::remove_all(dir);
  generate_dataset(s, dir);
  return load_dataset(dir);
}

}  // namespace

TEST_CASE("adam: first bias-corrected step moves by ~lr") {
  VecX p(1), g(1);
  p << 1.0;
  g << 1.0;
  AdamState st;
  adam_step(p, g, st, 0.01);
  CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(st.step == 1);
}

TEST_CASE("adam: zero gradient from a fresh state leaves parameters unchanged") {
  VecX p(3), g = VecX::Zero(3);
  p << 1.0, -2.0, 3.0;
  AdamState st;
  adam_step(p, g, st, 0.1);
  CHECK(p == Vec3(1.0, -2.0, 3.0));

  // After a real step, moments decay on zero gradients.
  VecX g2(3);
  g2 << 1.0, 1.0, 1.0;
  adam_step(p, g2, st, 0.1);
  double m_after = st.m[0];
  adam_step(p, VecX::Zero(3), st, 0.1);
  CHECK(st.m[0] == doctest::Approx(0.9 * m_after));
}

TEST_CASE("adam: identical runs are bitwise identical; non-finite gradients throw") {
  Rng rng(1);
  VecX p1(10), g(10);
  for (int i = 0; i < 10; ++i) p1[i] = rng.uniform(-1, 1);
  VecX p2 = p1;
  AdamState s1, s2;
  for (int it = 0; it < 50; ++it) {
    for (int i = 0; i < 10; ++i) g[i] = std::sin(0.1 * it + i);
    adam_step(p1, g, s1, 0.01);
    adam_step(p2, g, s2, 0.01);
  }
  CHECK(p1 == p2);

  g[3] = std::nan("");
  CHECK_THROWS_AS(adam_step(p1, g, s1, 0.01), NumericalError);
  VecX wrong(4);
  CHECK_THROWS_AS(adam_step(p1, wrong, s1, 0.01), std::invalid_argument);
}

TEST_CASE("sample_batch: conventions and determinism") {
  Dataset ds = plane_dataset("/tmp/lvnf_train_plane");
  TrainConfig cfg = toy_train_config();
  cfg.rays_per_iteration = 256;
  RadianceField field(cfg.field, 1);
  field.set_scene_scale(0.5);
  field.set_world_from_local(Sim3::translation(Vec3(0.1, 0, 0.05)));

  Rng rng1(9), rng2(9);
  auto b1 = sample_batch(field, ds, ds.train_indices, cfg, rng1);
  auto b2 = sample_batch(field, ds, ds.train_indices, cfg, rng2);
  REQUIRE(b1.size() == 256);
  for (size_t i = 0; i < b1.size(); ++i) {
    CHECK(b1[i].origin == b2[i].origin);
    CHECK(b1[i].samples.ts == b2[i].samples.ts);
    CHECK(b1[i].sup.target_rgb == b2[i].sup.target_rgb);
  }

  int with_depth = 0, sky = 0;
  for (const auto& r : b1) {
    if (r.sup.has_depth) {
      ++with_depth;
      CHECK(r.sup.depth.depth > 0.0);
      CHECK(!r.sup.is_sky);
    }
    if (r.sup.is_sky) {
      ++sky;
      CHECK(!r.sup.has_depth);  // sky rays carry no depth target
      CHECK(!r.sup.has_normal);
    }
    for (int i = 1; i < r.samples.ts.size(); ++i) CHECK(r.samples.ts[i] > r.samples.ts[i - 1]);
  }
  // The plane scene has sky around the plane and lidar on a subgrid.
  CHECK(with_depth > 0);
  CHECK(sky > 0);

  CHECK_THROWS_AS(sample_batch(field, ds, {}, cfg, rng1), std::invalid_argument);
  fs::remove_all("/tmp/lvnf_train_plane");
}

TEST_CASE("zero iterations returns the freshly initialized field") {
  Dataset ds = plane_dataset("/tmp/lvnf_train_zero");
  TrainConfig cfg = toy_train_config();
  cfg.iterations = 0;
  TrainResult r = train(ds, cfg);
  RadianceField fresh(r.field.config(), cfg.seed);
  CHECK(r.field.params() == fresh.params());
  fs::remove_all("/tmp/lvnf_train_zero");
}

TEST_CASE("toy plane scene: 2000 iterations reach train PSNR > 25 dB") {
  Dataset ds = plane_dataset("/tmp/lvnf_train_psnr");
  TrainConfig cfg = toy_train_config();
  cfg.iterations = 2000;
  TrainResult r = train(ds, cfg);

  // Loss log: finite values at every interval.
  CHECK(r.log.size() >= 20);
  for (const auto& e : r.log) {
    CHECK(std::isfinite(e.loss.total));
    CHECK(std::isfinite(e.loss.rgb));
  }

  // Smoothed (200-iteration windows, 8 log entries each) total loss is
  // non-increasing within 5% window to window.
  std::vector<double> windows;
  for (size_t i = 0; i + 8 <= r.log.size(); i += 8) {
    double sum = 0.0;
    for (size_t j = i; j < i + 8; ++j) sum += r.log[j].loss.total;
    windows.push_back(sum / 8.0);
  }
  REQUIRE(windows.size() >= 8);
  for (size_t i = 1; i < windows.size(); ++i) CHECK(windows[i] <= windows[i - 1] * 1.05);

  RenderOptions ropt;
  ropt.n_coarse = cfg.n_coarse;
  ropt.n_fine = cfg.n_fine;
  ropt.near = cfg.near;
  ropt.far = cfg.far;
  ropt.jitter = false;
  double psnr_sum = 0.0;
  for (int i : ds.train_indices) {
    RenderedImages imgs = render_image(r.field, ds.camera_of(i), ds.frames[i].pose, ropt);
    psnr_sum += psnr(imgs.rgb, ds.images[i]);
  }
  double mean_psnr = psnr_sum / ds.train_indices.size();
  INFO("train PSNR ", mean_psnr);
  CHECK(mean_psnr > 25.0);

  // Checkpoint round-trip renders bitwise-identical images.
  std::string ckpt = "/tmp/lvnf_train_psnr.ckpt";
  r.field.save(ckpt);
  RadianceField loaded = RadianceField::load(ckpt);
  RenderedImages a = render_image(r.field, ds.camera_of(0), ds.frames[0].pose, ropt);
  RenderedImages b = render_image(loaded, ds.camera_of(0), ds.frames[0].pose, ropt);
  CHECK(a.rgb.data == b.rgb.data);
  CHECK(a.depth.data == b.depth.data);
  CHECK(a.normal.data == b.normal.data);
  fs::remove(ckpt);
  fs::remove_all("/tmp/lvnf_train_psnr");
}

TEST_CASE("training is deterministic and submaps behave") {
  Dataset ds = plane_dataset("/tmp/lvnf_train_det");
  TrainConfig cfg = toy_train_config();
  cfg.iterations = 60;

  TrainResult a = train(ds, cfg);
  TrainResult b = train(ds, cfg);
  CHECK(a.field.params() == b.field.params());

  // One-cluster partition reproduces train() exactly.
  std::vector<Vec3> positions;
  for (const auto& f : ds.frames) positions.push_back(f.pose.t);
  Partition p1 = spectral_partition(positions, 1);
  auto sub1 = train_submaps(ds, p1, cfg);
  REQUIRE(sub1.size() == 1);
  CHECK(sub1[0].result.field.params() == a.field.params());
  CHECK((sub1[0].result.field.world_from_local().t - a.field.world_from_local().t).norm() <
        1e-12);

  // Two clusters: two independent fields with their own local frames.
  Partition p2 = spectral_partition(positions, 2);
  auto sub2 = train_submaps(ds, p2, cfg);
  REQUIRE(sub2.size() == 2);
  CHECK((sub2[0].result.field.world_from_local().t - p2.centroids[sub2[0].cluster]).norm() <
        1e-12);
  CHECK((sub2[1].result.field.world_from_local().t - p2.centroids[sub2[1].cluster]).norm() <
        1e-12);
  auto sub2_again = train_submaps(ds, p2, cfg);
  CHECK(sub2[0].result.field.params() == sub2_again[0].result.field.params());
  CHECK(sub2[1].result.field.params() == sub2_again[1].result.field.params());

  fs::remove_all("/tmp/lvnf_train_det");
}
