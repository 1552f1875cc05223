#include "lvnf/rendering.hpp"

#include <cmath>

namespace lvnf {

void quadrature_weights(const VecX& sigmas, const VecX& deltas, VecX& weights, VecX& trans) {
  const int n = int(sigmas.size());
  weights.resize(n);
  trans.resize(n);
  double T = 1.0;
  for (int i = 0; i < n; ++i) {
    trans[i] = T;
    double att = std::exp(-deltas[i] * sigmas[i]);
    weights[i] = T * (1.0 - att);
    T *= att;
  }
}

VecX quadrature_backward(const VecX& deltas, const VecX& weights, const VecX& trans,
                         const VecX& dweights) {
  const int n = int(weights.size());
  VecX dsigmas(n);
  // dw_i/dsigma_i = delta_i T_i exp(-delta_i sigma_i); for k < i the term is
  // -delta_k w_i, handled with a suffix sum.
  double suffix = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    double alive = trans[k] - weights[k];  // T_k exp(-delta_k sigma_k)
    dsigmas[k] = deltas[k] * (dweights[k] * alive - suffix);
    suffix += dweights[k] * weights[k];
  }
  return dsigmas;
}

RenderedPixel render_pixel(const RaySamples& s) {
  RenderedPixel out;
  out.opacity = s.weights.sum();
  out.color = (s.colors.transpose() * s.weights);
  out.depth = s.weights.dot(s.ts) / std::max(out.opacity, 1e-6);
  if (s.has_normals && out.opacity >= kNormalOpacityGate) {
    Vec3 m = s.normals.transpose() * s.weights;
    double len = m.norm();
    if (len > 1e-12) {
      out.normal = m / len;
      out.has_normal = true;
    }
  }
  return out;
}

RenderedPixel render_ray(const RadianceField& field, const Ray& ray, const RenderOptions& opt,
                         Rng* rng) {
  const Sim3 local_from_world = field.world_from_local().inverse();
  const double scale = field.scene_scale() * local_from_world.s;
  Vec3 origin = local_from_world.apply(ray.origin) * field.scene_scale();
  Vec3 dir = local_from_world.rotate(ray.dir);
  const double near = opt.near * scale;
  const double far = opt.far * scale;

  SampleTape tape;
  SampleSet coarse = sample_stratified(near, far, opt.n_coarse, rng);
  VecX coarse_sigmas(coarse.ts.size());
  for (int i = 0; i < coarse.ts.size(); ++i)
    coarse_sigmas[i] = field.eval_sigma(origin + coarse.ts[i] * dir, tape);
  VecX cw, ct;
  quadrature_weights(coarse_sigmas, coarse.deltas, cw, ct);

  SampleSet fine = sample_importance(near, far, coarse.ts, cw, opt.n_fine, rng);
  const int n = int(fine.ts.size());
  RaySamples s;
  s.ts = fine.ts;
  s.deltas = fine.deltas;
  s.sigmas.resize(n);
  s.colors.resize(n, 3);
  s.normals.resize(n, 3);
  s.has_normals = opt.want_normals;
  for (int i = 0; i < n; ++i) {
    SampleOutput o = field.eval(origin + fine.ts[i] * dir, dir, ray.frame_id, opt.want_normals, tape);
    s.sigmas[i] = o.sigma;
    s.colors.row(i) = o.rgb.transpose();
    if (opt.want_normals) {
      double len = o.grad_sigma.norm();
      Vec3 n = len > 1e-12 ? Vec3(-o.grad_sigma / len) : Vec3::Zero();
      s.normals.row(i) = n.transpose();
    }
  }
  quadrature_weights(s.sigmas, s.deltas, s.weights, s.trans);

  RenderedPixel px = render_pixel(s);
  px.depth /= scale;  // back to metres
  if (px.has_normal) px.normal = field.world_from_local().rotate(px.normal);
  return px;
}

RenderedImages render_image(const RadianceField& field, const PinholeCamera& cam,
                            const PoseStamped& world_pose, const RenderOptions& opt, Rng* rng) {
  RenderedImages out;
  out.rgb = ImageF(cam.width, cam.height, 3);
  out.depth = ImageF(cam.width, cam.height, 1);
  out.normal = ImageF(cam.width, cam.height, 3);
  out.opacity = ImageF(cam.width, cam.height, 1);

  Mat3 R = world_pose.q.toRotationMatrix();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      Ray ray;
      ray.origin = world_pose.t;
      ray.dir = (R * pixel_bearing(cam, x, y)).normalized();
      ray.near = opt.near;
      ray.far = opt.far;
      ray.pixel = Vec2i(x, y);
      ray.frame_id = world_pose.frame_id;
      RenderedPixel px = render_ray(field, ray, opt, rng);
      for (int c = 0; c < 3; ++c) out.rgb.at(x, y, c) = px.color[c];
      out.depth.at(x, y) = px.opacity > 1e-3 ? px.depth : 0.0;
      out.opacity.at(x, y) = px.opacity;
      if (px.has_normal)
        for (int c = 0; c < 3; ++c) out.normal.at(x, y, c) = px.normal[c];
    }
  }
  return out;
}

}  // namespace lvnf
