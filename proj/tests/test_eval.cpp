#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lvnf/metrics.hpp"
#include "lvnf/rng.hpp"

using namespace lvnf;

namespace {

PointCloud cloud_of(std::initializer_list<Vec3> pts) {
  PointCloud c;
  for (const auto& p : pts) c.positions.push_back(p);
  return c;
}

ImageF constant_image(int w, int h, double v, int ch = 1) { return ImageF(w, h, ch, v); }

}  // namespace

TEST_CASE("accuracy and completeness of identical clouds are exactly zero") {
  Rng rng(1);
  PointCloud c;
  for (int i = 0; i < 300; ++i) c.positions.push_back(rng.uniform_vec3(-4.0, 4.0));
  GeomStats a = accuracy(c, c, 1.0);
  GeomStats b = completeness(c, c, 1.0);
  CHECK(a.mean == 0.0);
  CHECK(a.median == 0.0);
  CHECK(b.mean == 0.0);
  CHECK(a.inlier_01 == 1.0);
}

TEST_CASE("single pair distance and hand nearest-neighbor mean") {
  PointCloud recon = cloud_of({Vec3(0, 0, 0)});
  PointCloud ref = cloud_of({Vec3(0, 0, 1)});
  CHECK(accuracy(recon, ref, 2.0).mean == doctest::Approx(1.0));

  PointCloud recon2 = cloud_of({Vec3(0, 0, 0), Vec3(0, 0, 0.2)});
  PointCloud ref2 = cloud_of({Vec3(0, 0, 0)});
  CHECK(accuracy(recon2, ref2, 1.0).mean == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("completeness: subset and cap behavior") {
  Rng rng(2);
  PointCloud recon;
  for (int i = 0; i < 100; ++i) recon.positions.push_back(rng.uniform_vec3(-2.0, 2.0));
  PointCloud ref;
  for (int i = 0; i < 50; ++i) ref.positions.push_back(recon.positions[i * 2]);
  CHECK(completeness(recon, ref, 1.0).mean == 0.0);  // reference subset of recon

  PointCloud far_ref = cloud_of({Vec3(0, 0, 0), Vec3(0, 0, 2.0)});
  PointCloud near_recon = cloud_of({Vec3(0, 0, 0)});
  GeomStats s = completeness(near_recon, far_ref, 1.0);
  CHECK(s.mean == doctest::Approx(0.5));  // (0 + capped 1.0) / 2
}

TEST_CASE("uniform grid reference vs half-coverage recon (brute-force oracle)") {
  PointCloud ref, recon;
  const double step = 0.1;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      Vec3 p(i * step, j * step, 0.0);
      ref.positions.push_back(p);
      if (i < 10) recon.positions.push_back(p);  // left half covered
    }
  GeomStats s = completeness(recon, ref, 1.0);
  double brute_sum = 0.0;
  for (const auto& p : ref.positions) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : recon.positions) best = std::min(best, (p - q).norm());
    brute_sum += std::min(best, 1.0);
  }
  CHECK(s.mean == doctest::Approx(brute_sum / ref.positions.size()).epsilon(1e-12));
}

TEST_CASE("empty clouds are rejected") {
  PointCloud empty, one = cloud_of({Vec3(0, 0, 0)});
  CHECK_THROWS_AS(accuracy(empty, one, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(completeness(one, empty, 1.0), std::invalid_argument);
}

TEST_CASE("adding an outlier cannot decrease mean accuracy") {
  Rng rng(3);
  PointCloud ref;
  for (int i = 0; i < 200; ++i) ref.positions.push_back(rng.uniform_vec3(-2.0, 2.0));
  PointCloud recon;
  for (int i = 0; i < 100; ++i)
    recon.positions.push_back(ref.positions[i] + 0.01 * rng.unit_vec3());
  double before = accuracy(recon, ref, 1.0).mean;
  recon.positions.push_back(Vec3(50, 50, 50));  // far outlier
  double after = accuracy(recon, ref, 1.0).mean;
  CHECK(after >= before);
}

TEST_CASE("psnr closed forms") {
  ImageF a = constant_image(16, 16, 0.5, 3);
  CHECK(psnr(a, a) == 100.0);

  ImageF b = constant_image(16, 16, 0.6, 3);  // MSE = 0.01
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));

  ImageF c = constant_image(16, 16, 0.55, 3);  // MSE = 0.0025
  CHECK(psnr(a, c) == doctest::Approx(26.0206).epsilon(1e-5));

  ImageF wrong(8, 8, 3, 0.0);
  CHECK_THROWS_AS(psnr(a, wrong), std::invalid_argument);
}

TEST_CASE("psnr and ssim are symmetric") {
  Rng rng(4);
  ImageF a(24, 24, 3), b(24, 24, 3);
  for (auto& v : a.data) v = rng.uniform();
  for (auto& v : b.data) v = rng.uniform();
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
}

TEST_CASE("ssim: identical images give exactly 1") {
  Rng rng(5);
  ImageF a(32, 32, 3);
  for (auto& v : a.data) v = rng.uniform();
  CHECK(ssim(a, a) == 1.0);
}

TEST_CASE("ssim of a checkerboard against its negative is negative") {
  ImageF a(32, 32, 1), b(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      double v = ((x + y) & 1) ? 1.0 : 0.0;
      a.at(x, y) = v;
      b.at(x, y) = 1.0 - v;
    }
  CHECK(ssim(a, b) < 0.0);
}

TEST_CASE("ssim of shifted constants reduces to the luminance term") {
  const double u = 0.4, v = 0.5;
  ImageF a = constant_image(16, 16, u);
  ImageF b = constant_image(16, 16, v);
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  // Windowed oracle: zero variances leave (2 u v + C1)/(u^2 + v^2 + C1) * (C2/C2).
  double expect = (2 * u * v + c1) / (u * u + v * v + c1);
  CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ssim rejects images smaller than the window") {
  ImageF tiny = constant_image(8, 8, 0.5);
  CHECK_THROWS_AS(ssim(tiny, tiny), std::invalid_argument);
}

TEST_CASE("masked metrics: full mask equals unmasked; empty mask throws") {
  Rng rng(6);
  ImageF a(24, 24, 3), b(24, 24, 3);
  for (auto& vv : a.data) vv = rng.uniform();
  for (auto& vv : b.data) vv = rng.uniform();
  ImageU8 full(24, 24, 1, 255);
  MaskedMetrics m = masked_metrics(a, b, full);
  CHECK(m.psnr == doctest::Approx(psnr(a, b)).epsilon(1e-12));
  CHECK(m.ssim == doctest::Approx(ssim(a, b)).epsilon(1e-12));

  ImageU8 empty(24, 24, 1, 0);
  CHECK_THROWS_AS(masked_metrics(a, b, empty), std::invalid_argument);
}

TEST_CASE("masking out a corrupted quadrant recovers the clean psnr") {
  Rng rng(7);
  ImageF clean(32, 32, 3);
  for (auto& v : clean.data) v = rng.uniform();
  ImageF corrupted = clean;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) corrupted.at(x, y, c) = rng.uniform();
  ImageU8 mask(32, 32, 1, 255);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) mask.at(x, y) = 0;

  MaskedMetrics m = masked_metrics(clean, corrupted, mask);
  CHECK(m.psnr == 100.0);  // identical outside the corrupted quadrant
}

TEST_CASE("crop boxes keep only inside points; error cloud encodes distance") {
  PointCloud cloud = cloud_of({Vec3(0, 0, 0), Vec3(5, 5, 5), Vec3(0.5, 0.5, 0.5)});
  CropBox box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  PointCloud cropped = crop_to_boxes(cloud, {box});
  CHECK(cropped.size() == 2);

  PointCloud ref = cloud_of({Vec3(0, 0, 0)});
  PointCloud err = error_cloud(cloud, ref, 1.0);
  REQUIRE(err.size() == 3);
  CHECK(err.colors[0][2] == 255);  // zero error: blue
  CHECK(err.colors[1][0] == 255);  // capped error: red
}
