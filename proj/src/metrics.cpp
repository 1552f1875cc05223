#include "lvnf/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lvnf {

VecX nn_distances(const PointCloud& from, const PointCloud& to) {
  KdTree3 tree(to.positions);
  VecX d(from.size());
  for (size_t i = 0; i < from.size(); ++i) {
    double d2 = 0.0;
    tree.nearest(from.positions[i], &d2);
    d[int(i)] = std::sqrt(d2);
  }
  return d;
}

namespace {

GeomStats stats_from_distances(VecX d, double cap) {
  GeomStats s;
  s.count = int(d.size());
  if (s.count == 0) return s;
  int in01 = 0, in05 = 0, in10 = 0;
  double sum = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] <= 0.1) ++in01;
    if (d[i] <= 0.5) ++in05;
    if (d[i] <= 1.0) ++in10;
    d[i] = std::min(d[i], cap);
    sum += d[i];
  }
  s.mean = sum / s.count;
  std::sort(d.data(), d.data() + d.size());
  s.median = s.count % 2 == 1 ? d[s.count / 2] : 0.5 * (d[s.count / 2 - 1] + d[s.count / 2]);
  s.inlier_01 = double(in01) / s.count;
  s.inlier_05 = double(in05) / s.count;
  s.inlier_10 = double(in10) / s.count;
  return s;
}

}  // namespace

GeomStats accuracy(const PointCloud& recon, const PointCloud& reference, double cap) {
  if (recon.empty() || reference.empty())
    throw std::invalid_argument("accuracy: empty point cloud");
  return stats_from_distances(nn_distances(recon, reference), cap);
}

GeomStats completeness(const PointCloud& recon, const PointCloud& reference, double cap) {
  if (recon.empty() || reference.empty())
    throw std::invalid_argument("completeness: empty point cloud");
  return stats_from_distances(nn_distances(reference, recon), cap);
}

GeomReport evaluate_geometry(const PointCloud& recon, const PointCloud& reference, double cap) {
  GeomReport r;
  r.cap = cap;
  r.accuracy = accuracy(recon, reference, cap);
  r.completeness = completeness(recon, reference, cap);
  return r;
}

PointCloud error_cloud(const PointCloud& recon, const PointCloud& reference, double cap) {
  VecX d = nn_distances(recon, reference);
  PointCloud out;
  out.positions = recon.positions;
  out.colors.resize(recon.size());
  for (size_t i = 0; i < recon.size(); ++i) {
    double t = std::min(d[int(i)], cap) / cap;  // 0 = blue, 1 = red
    out.colors[i] = {uint8_t(std::lround(255.0 * t)), 0, uint8_t(std::lround(255.0 * (1.0 - t)))};
  }
  return out;
}

PointCloud crop_to_boxes(const PointCloud& cloud, const std::vector<CropBox>& boxes) {
  if (boxes.empty()) return cloud;
  PointCloud out;
  for (size_t i = 0; i < cloud.size(); ++i) {
    bool keep = false;
    for (const auto& b : boxes)
      if (b.contains(cloud.positions[i])) {
        keep = true;
        break;
      }
    if (!keep) continue;
    out.positions.push_back(cloud.positions[i]);
    if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
    if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Image metrics

double psnr(const ImageF& a, const ImageF& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: image dimensions differ");
  if (a.empty()) throw std::invalid_argument("psnr: empty image");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= double(a.data.size());
  if (mse <= 0.0) return 100.0;
  return std::min(10.0 * std::log10(1.0 / mse), 100.0);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kSsimC2 = 0.03 * 0.03;

ImageF to_gray(const ImageF& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw std::invalid_argument("ssim: expected 1 or 3 channels");
  ImageF g(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      g.at(x, y) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
  return g;
}

std::vector<double> gaussian_window() {
  std::vector<double> w(kSsimWindow * kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
      w[(dy + r) * kSsimWindow + (dx + r)] = v;
      sum += v;
    }
  for (auto& v : w) v /= sum;
  return w;
}

double ssim_impl(const ImageF& ga, const ImageF& gb, const ImageU8* mask) {
  const int r = kSsimWindow / 2;
  if (ga.width < kSsimWindow || ga.height < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  static const std::vector<double> win = gaussian_window();

  double total = 0.0;
  long n_windows = 0;
  for (int cy = r; cy < ga.height - r; ++cy) {
    for (int cx = r; cx < ga.width - r; ++cx) {
      if (mask) {
        bool inside = true;
        for (int dy = -r; dy <= r && inside; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            if (mask->at(cx + dx, cy + dy) == 0) {
              inside = false;
              break;
            }
        if (!inside) continue;
      }
      double mu_a = 0.0, mu_b = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          double w = win[(dy + r) * kSsimWindow + (dx + r)];
          mu_a += w * ga.at(cx + dx, cy + dy);
          mu_b += w * gb.at(cx + dx, cy + dy);
        }
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          double w = win[(dy + r) * kSsimWindow + (dx + r)];
          double da = ga.at(cx + dx, cy + dy) - mu_a;
          double db = gb.at(cx + dx, cy + dy) - mu_b;
          var_a += w * da * da;
          var_b += w * db * db;
          cov += w * da * db;
        }
      double num = (2.0 * mu_a * mu_b + kSsimC1) * (2.0 * cov + kSsimC2);
      double den = (mu_a * mu_a + mu_b * mu_b + kSsimC1) * (var_a + var_b + kSsimC2);
      total += num / den;
      ++n_windows;
    }
  }
  if (n_windows == 0) throw std::invalid_argument("ssim: no valid windows");
  return total / double(n_windows);
}

}  // namespace

double ssim(const ImageF& a, const ImageF& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: image dimensions differ");
  return ssim_impl(to_gray(a), to_gray(b), nullptr);
}

MaskedMetrics masked_metrics(const ImageF& a, const ImageF& b, const ImageU8& mask) {
  if (!a.same_shape(b)) throw std::invalid_argument("masked_metrics: image dimensions differ");
  if (mask.width != a.width || mask.height != a.height)
    throw std::invalid_argument("masked_metrics: mask dimensions differ");

  double mse = 0.0;
  long n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (mask.at(x, y) == 0) continue;
      for (int c = 0; c < a.channels; ++c) {
        double d = a.at(x, y, c) - b.at(x, y, c);
        mse += d * d;
        ++n;
      }
    }
  if (n == 0) throw std::invalid_argument("masked_metrics: empty mask");
  mse /= double(n);

  MaskedMetrics out;
  out.psnr = mse <= 0.0 ? 100.0 : std::min(10.0 * std::log10(1.0 / mse), 100.0);
  out.ssim = ssim_impl(to_gray(a), to_gray(b), &mask);
  return out;
}

}  // namespace lvnf
