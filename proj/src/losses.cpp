#include "lvnf/losses.hpp"

#include <cmath>

namespace lvnf {

double photometric_loss(const Vec3& rendered, const Vec3& target) {
  return (rendered - target).squaredNorm() / 3.0;
}

Vec3 photometric_loss_backward(const Vec3& rendered, const Vec3& target) {
  return 2.0 / 3.0 * (rendered - target);
}

double depth_loss(const VecX& ts, const VecX& deltas, const VecX& weights,
                  const DepthTarget& target) {
  const double inv_two_var = 1.0 / (2.0 * target.sigma_hat * target.sigma_hat);
  double loss = 0.0;
  for (int i = 0; i < ts.size(); ++i) {
    double r = ts[i] - target.depth;
    loss += -std::log(weights[i] + kDepthLossEps) * std::exp(-r * r * inv_two_var) * deltas[i];
  }
  return loss;
}

VecX depth_loss_backward(const VecX& ts, const VecX& deltas, const VecX& weights,
                         const DepthTarget& target) {
  const double inv_two_var = 1.0 / (2.0 * target.sigma_hat * target.sigma_hat);
  VecX dw(weights.size());
  for (int i = 0; i < ts.size(); ++i) {
    double r = ts[i] - target.depth;
    dw[i] = -std::exp(-r * r * inv_two_var) * deltas[i] / (weights[i] + kDepthLossEps);
  }
  return dw;
}

double normal_loss(const Vec3& n_hat, const Vec3& n_bar) {
  return (n_hat - n_bar).cwiseAbs().sum() + std::abs(1.0 - n_hat.dot(n_bar));
}

Vec3 normal_loss_backward(const Vec3& n_hat, const Vec3& n_bar) {
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    double d = n_hat[k] - n_bar[k];
    g[k] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  double z = 1.0 - n_hat.dot(n_bar);
  double sz = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
  g -= sz * n_bar;
  return g;
}

double sky_loss(const VecX& weights, bool is_sky) {
  return is_sky ? weights.squaredNorm() : 0.0;
}

VecX sky_loss_backward(const VecX& weights, bool is_sky) {
  if (!is_sky) return VecX::Zero(weights.size());
  return 2.0 * weights;
}

LossBreakdown total_loss(const std::vector<RaySamples>& samples,
                         const std::vector<RenderedPixel>& renders,
                         const std::vector<RaySupervision>& supervision, const LossWeights& lw) {
  const size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("total_loss: empty batch");
  if (renders.size() != n || supervision.size() != n)
    throw std::invalid_argument("total_loss: batch size mismatch");

  LossBreakdown b;
  for (size_t i = 0; i < n; ++i) {
    const auto& sup = supervision[i];
    b.rgb += photometric_loss(renders[i].color, sup.target_rgb);
    ++b.n_rgb;
    if (sup.has_depth && !sup.is_sky) {
      b.depth += depth_loss(samples[i].ts, samples[i].deltas, samples[i].weights, sup.depth);
      ++b.n_depth;
    }
    if (sup.has_normal && !sup.is_sky) {
      if (renders[i].has_normal) b.normal += normal_loss(renders[i].normal, sup.normal);
      ++b.n_normal;
    }
    if (sup.is_sky) {
      b.sky += sky_loss(samples[i].weights, true);
      ++b.n_sky;
    }
  }
  b.rgb /= b.n_rgb;
  if (b.n_depth > 0) b.depth /= b.n_depth;
  if (b.n_normal > 0) b.normal /= b.n_normal;
  if (b.n_sky > 0) b.sky /= b.n_sky;
  b.total = b.rgb + lw.lambda_depth * b.depth + lw.lambda_normal * b.normal + lw.lambda_sky * b.sky;
  return b;
}

}  // namespace lvnf
