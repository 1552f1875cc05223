#pragma once

#include <vector>

#include "lvnf/rendering.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct DepthTarget {
  double depth = 0.0;      // metres (or normalized units inside training)
  double sigma_hat = 0.05; // std of the depth prior, same units
};

// Per-ray ground truth attached to a training ray.
struct RaySupervision {
  Vec3 target_rgb = Vec3::Zero();
  bool has_depth = false;
  DepthTarget depth;
  bool has_normal = false;
  Vec3 normal = Vec3::Zero();  // unit, same frame as rendered normals
  bool is_sky = false;
};

struct LossWeights {
  double lambda_depth = 0.1;
  double lambda_normal = 0.05;
  double lambda_sky = 0.01;
};

constexpr double kDepthLossEps = 1e-6;

// Mean squared error over RGB channels.
double photometric_loss(const Vec3& rendered, const Vec3& target);
Vec3 photometric_loss_backward(const Vec3& rendered, const Vec3& target);

// Discrete ray-termination surrogate of KL[N(D, sigma_hat) || h(t)]:
// sum_i -log(w_i + eps) * exp(-(t_i - D)^2 / (2 sigma_hat^2)) * delta_i.
double depth_loss(const VecX& ts, const VecX& deltas, const VecX& weights,
                  const DepthTarget& target);
VecX depth_loss_backward(const VecX& ts, const VecX& deltas, const VecX& weights,
                         const DepthTarget& target);

// ||n_hat - n_bar||_1 + |1 - n_hat . n_bar|.
double normal_loss(const Vec3& n_hat, const Vec3& n_bar);
Vec3 normal_loss_backward(const Vec3& n_hat, const Vec3& n_bar);

// sum_i w_i^2 for sky rays, 0 otherwise.
double sky_loss(const VecX& weights, bool is_sky);
VecX sky_loss_backward(const VecX& weights, bool is_sky);

struct LossBreakdown {
  double rgb = 0.0;
  double depth = 0.0;
  double normal = 0.0;
  double sky = 0.0;
  double total = 0.0;
  int n_rgb = 0, n_depth = 0, n_normal = 0, n_sky = 0;
};

// Batch composition: every term mean-reduced over the rays carrying that
// supervision, total = rgb + lambda_d*depth + lambda_n*normal + lambda_s*sky.
// Rays whose rendered normal is absent contribute zero to the normal term.
LossBreakdown total_loss(const std::vector<RaySamples>& samples,
                         const std::vector<RenderedPixel>& renders,
                         const std::vector<RaySupervision>& supervision, const LossWeights& lw);

}  // namespace lvnf
