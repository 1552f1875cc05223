#pragma once

#include "lvnf/camera.hpp"
#include "lvnf/field.hpp"
#include "lvnf/rng.hpp"
#include "lvnf/sampling.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

// Per-ray quadrature state: the discrete ray-termination distribution.
struct RaySamples {
  VecX ts;          // sample midpoints, ascending
  VecX deltas;      // > 0
  VecX sigmas;      // densities at samples
  VecX weights;     // w_i = T_i (1 - exp(-delta_i sigma_i))
  VecX trans;       // T_i, non-increasing
  MatX3 colors;     // per-sample rgb
  MatX3 normals;    // per-sample unit normals (-grad sigma, normalized)
  bool has_normals = false;

  double opacity() const { return weights.sum(); }
};

// w_i and T_i from the quadrature rule. deltas > 0, sigmas >= 0.
void quadrature_weights(const VecX& sigmas, const VecX& deltas, VecX& weights, VecX& trans);

// d loss / d sigmas given d loss / d weights.
VecX quadrature_backward(const VecX& deltas, const VecX& weights, const VecX& trans,
                         const VecX& dweights);

struct RenderedPixel {
  Vec3 color = Vec3::Zero();
  double depth = 0.0;
  double opacity = 0.0;
  Vec3 normal = Vec3::Zero();
  bool has_normal = false;
};

// Normal is emitted only when opacity >= this gate.
constexpr double kNormalOpacityGate = 0.1;

RenderedPixel render_pixel(const RaySamples& samples);

struct RenderOptions {
  int n_coarse = 64;
  int n_fine = 64;
  double near = 0.1;   // metres
  double far = 120.0;  // metres
  bool jitter = false;
  bool want_normals = true;
};

// Renders one metric world-frame ray against the field (handles the
// local-frame and scene-scale conversions; outputs metric depth and
// world-frame normals).
RenderedPixel render_ray(const RadianceField& field, const Ray& ray, const RenderOptions& opt,
                         Rng* rng = nullptr);

struct RenderedImages {
  ImageF rgb;      // 3ch in [0,1]
  ImageF depth;    // metres, 0 where opacity ~ 0
  ImageF normal;   // 3ch in [-1,1], zero where absent
  ImageF opacity;  // 1ch
};

RenderedImages render_image(const RadianceField& field, const PinholeCamera& cam,
                            const PoseStamped& world_pose, const RenderOptions& opt,
                            Rng* rng = nullptr);

}  // namespace lvnf
