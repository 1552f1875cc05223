#pragma once

#include <vector>

#include "lvnf/point_cloud.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct GeomStats {
  double mean = 0.0;        // capped
  double median = 0.0;      // capped
  double inlier_01 = 0.0;   // fraction of distances <= 0.1 m
  double inlier_05 = 0.0;
  double inlier_10 = 0.0;
  int count = 0;
};

struct GeomReport {
  GeomStats accuracy;
  GeomStats completeness;
  double cap = 1.0;
};

// Nearest-neighbor distance from each point of `from` to `to` (uncapped).
VecX nn_distances(const PointCloud& from, const PointCloud& to);

// Distance from the reconstruction to the reference, capped.
GeomStats accuracy(const PointCloud& recon, const PointCloud& reference, double cap = 1.0);
// Distance from the reference to the reconstruction, capped.
GeomStats completeness(const PointCloud& recon, const PointCloud& reference, double cap = 1.0);

GeomReport evaluate_geometry(const PointCloud& recon, const PointCloud& reference,
                             double cap = 1.0);

// Recon colored by its capped distance to the reference, blue (0) to red (cap).
PointCloud error_cloud(const PointCloud& recon, const PointCloud& reference, double cap = 1.0);

struct CropBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

// Keeps points inside any of the boxes (used for evaluating changed regions).
PointCloud crop_to_boxes(const PointCloud& cloud, const std::vector<CropBox>& boxes);

// 10*log10(1/MSE) over all channels, values in [0,1]; identical images report
// the 100 dB cap.
double psnr(const ImageF& a, const ImageF& b);

// Windowed SSIM: 11x11 Gaussian (sigma 1.5), K1=0.01, K2=0.03, range 1.0,
// mean over fully-interior windows. 3-channel input is converted with luma
// weights (0.299, 0.587, 0.114).
double ssim(const ImageF& a, const ImageF& b);

struct MaskedMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

// PSNR over pixels where mask != 0; SSIM over windows fully inside the mask.
MaskedMetrics masked_metrics(const ImageF& a, const ImageF& b, const ImageU8& mask);

}  // namespace lvnf
