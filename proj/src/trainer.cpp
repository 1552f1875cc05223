#include "lvnf/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "lvnf/rendering.hpp"

namespace fs = std::filesystem;

namespace lvnf {

void adam_step(VecX& params, const VecX& grads, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
  if (grads.size() != params.size())
    throw std::invalid_argument("adam_step: gradient/parameter size mismatch");
  if (state.m.size() != params.size()) {
    state.m.setZero(params.size());
    state.v.setZero(params.size());
    state.step = 0;
  }
  if (!grads.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(beta2, double(state.step));
  params.array() -=
      lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + eps);
}

// ---------------------------------------------------------------------------

std::vector<BatchRay> sample_batch(const RadianceField& field, const Dataset& ds,
                                   const std::vector<int>& frame_indices, const TrainConfig& cfg,
                                   Rng& rng) {
  if (frame_indices.empty())
    throw std::invalid_argument("sample_batch: no training frames in dataset");

  // Cumulative pixel counts for exact uniformity over all pixels.
  std::vector<uint64_t> cum(frame_indices.size() + 1, 0);
  for (size_t i = 0; i < frame_indices.size(); ++i) {
    const PinholeCamera& cam = ds.camera_of(frame_indices[i]);
    cum[i + 1] = cum[i] + uint64_t(cam.width) * cam.height;
  }

  const Sim3 local_from_world = field.world_from_local().inverse();
  const double scale = field.scene_scale();
  const double near = cfg.near * scale;
  const double far = cfg.far * scale;

  SampleTape scratch;
  std::vector<BatchRay> batch;
  batch.reserve(cfg.rays_per_iteration);
  for (int r = 0; r < cfg.rays_per_iteration; ++r) {
    uint64_t pick = rng.uniform_int(cum.back());
    size_t fi = 0;
    while (pick >= cum[fi + 1]) ++fi;
    const int frame = frame_indices[fi];
    const PinholeCamera& cam = ds.camera_of(frame);
    uint64_t local = pick - cum[fi];
    int px = int(local % uint64_t(cam.width));
    int py = int(local / uint64_t(cam.width));

    const FrameRecord& rec = ds.frames[frame];
    Mat3 R = rec.pose.q.toRotationMatrix();

    BatchRay ray;
    ray.frame_id = rec.id;
    ray.origin = local_from_world.apply(rec.pose.t) * scale;
    ray.dir = (local_from_world.rotate(R * pixel_bearing(cam, px, py))).normalized();

    const ImageF& img = ds.images[frame];
    ray.sup.target_rgb = Vec3(img.at(px, py, 0), img.at(px, py, 1), img.at(px, py, 2));
    if (ds.has_sky(frame) && ds.sky_masks[frame].at(px, py) != 0) ray.sup.is_sky = true;
    if (!ray.sup.is_sky) {
      if (ds.has_depth(frame)) {
        double d = ds.depths[frame].at(px, py);
        if (d > 0.0) {
          ray.sup.has_depth = true;
          ray.sup.depth.depth = d * scale;
          ray.sup.depth.sigma_hat = cfg.sigma_hat * scale;
        }
      }
      if (ray.sup.has_depth && ds.has_normals(frame)) {
        const ImageF& ni = ds.normal_images[frame];
        Vec3 n_cam(ni.at(px, py, 0), ni.at(px, py, 1), ni.at(px, py, 2));
        if (n_cam.norm() > 0.5) {
          ray.sup.has_normal = true;
          ray.sup.normal = (local_from_world.rotate(R * n_cam)).normalized();
        }
      }
    }

    // Freeze sample positions: stratified + importance against the current field.
    SampleSet coarse = sample_stratified(near, far, cfg.n_coarse, &rng);
    VecX sigmas(coarse.ts.size());
    for (int i = 0; i < coarse.ts.size(); ++i)
      sigmas[i] = field.eval_sigma(ray.origin + coarse.ts[i] * ray.dir, scratch);
    VecX w, t;
    quadrature_weights(sigmas, coarse.deltas, w, t);
    ray.samples = sample_importance(near, far, coarse.ts, w, cfg.n_fine, &rng);

    batch.push_back(std::move(ray));
  }
  return batch;
}

// ---------------------------------------------------------------------------

LossBreakdown batch_loss(const RadianceField& field, const std::vector<BatchRay>& batch,
                         const LossWeights& lw, const LossGates& gates, VecX* grad) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");

  LossBreakdown b;
  b.n_rgb = int(batch.size());
  for (const auto& ray : batch) {
    if (gates.depth && ray.sup.has_depth && !ray.sup.is_sky) ++b.n_depth;
    if (gates.normal && ray.sup.has_normal && !ray.sup.is_sky) ++b.n_normal;
    if (gates.sky && ray.sup.is_sky) ++b.n_sky;
  }

  std::vector<SampleTape> tapes;
  RaySamples s;
  for (const auto& ray : batch) {
    const int n = int(ray.samples.ts.size());
    const bool want_grad =
        gates.normal && ray.sup.has_normal && !ray.sup.is_sky;
    if (int(tapes.size()) < n) tapes.resize(n);

    s.ts = ray.samples.ts;
    s.deltas = ray.samples.deltas;
    s.sigmas.resize(n);
    s.colors.resize(n, 3);
    s.normals.resize(n, 3);
    s.has_normals = want_grad;
    std::vector<Vec3> grad_sigmas(want_grad ? n : 0);
    for (int i = 0; i < n; ++i) {
      SampleOutput o = field.eval(ray.origin + s.ts[i] * ray.dir, ray.dir, ray.frame_id,
                                  want_grad, tapes[i]);
      s.sigmas[i] = o.sigma;
      s.colors.row(i) = o.rgb.transpose();
      if (want_grad) {
        grad_sigmas[i] = o.grad_sigma;
        double len = o.grad_sigma.norm();
        Vec3 ni = len > 1e-12 ? Vec3(-o.grad_sigma / len) : Vec3::Zero();
        s.normals.row(i) = ni.transpose();
      }
    }
    quadrature_weights(s.sigmas, s.deltas, s.weights, s.trans);

    const double opacity = s.weights.sum();
    const Vec3 color = s.colors.transpose() * s.weights;

    VecX dw = VecX::Zero(n);
    MatX3 dcolors = MatX3::Zero(n, 3);
    std::vector<Vec3> dgrad_sigmas(want_grad ? n : 0, Vec3::Zero());

    b.rgb += photometric_loss(color, ray.sup.target_rgb);
    if (grad) {
      Vec3 dcol = photometric_loss_backward(color, ray.sup.target_rgb) / double(b.n_rgb);
      dw += s.colors * dcol;
      dcolors = s.weights * dcol.transpose();
    }

    if (gates.depth && ray.sup.has_depth && !ray.sup.is_sky) {
      b.depth += depth_loss(s.ts, s.deltas, s.weights, ray.sup.depth);
      if (grad)
        dw += (lw.lambda_depth / b.n_depth) *
              depth_loss_backward(s.ts, s.deltas, s.weights, ray.sup.depth);
    }

    if (gates.sky && ray.sup.is_sky) {
      b.sky += sky_loss(s.weights, true);
      if (grad) dw += (lw.lambda_sky / b.n_sky) * sky_loss_backward(s.weights, true);
    }

    if (gates.normal && ray.sup.has_normal && !ray.sup.is_sky && opacity >= kNormalOpacityGate) {
      Vec3 m = s.normals.transpose() * s.weights;
      double mlen = m.norm();
      if (mlen > 1e-12) {
        Vec3 nhat = m / mlen;
        b.normal += normal_loss(nhat, ray.sup.normal);
        if (grad) {
          Vec3 dnhat =
              (lw.lambda_normal / b.n_normal) * normal_loss_backward(nhat, ray.sup.normal);
          Vec3 dm = (dnhat - nhat * nhat.dot(dnhat)) / mlen;
          for (int i = 0; i < n; ++i) {
            Vec3 ni = s.normals.row(i).transpose();
            dw[i] += ni.dot(dm);
            Vec3 dni = s.weights[i] * dm;
            double ulen = grad_sigmas[i].norm();
            if (ulen > 1e-12)
              dgrad_sigmas[i] = -(dni - ni * ni.dot(dni)) / ulen;
          }
        }
      }
    }

    if (grad) {
      VecX dsig = quadrature_backward(s.deltas, s.weights, s.trans, dw);
      for (int i = 0; i < n; ++i) {
        Vec3 dgs = want_grad ? dgrad_sigmas[i] : Vec3::Zero();
        field.backward(tapes[i], dsig[i], dcolors.row(i).transpose(), dgs, *grad);
      }
    }
  }

  b.rgb /= b.n_rgb;
  if (b.n_depth > 0) b.depth /= b.n_depth;
  if (b.n_normal > 0) b.normal /= b.n_normal;
  if (b.n_sky > 0) b.sky /= b.n_sky;
  b.total = b.rgb + lw.lambda_depth * b.depth + lw.lambda_normal * b.normal +
            lw.lambda_sky * b.sky;
  return b;
}

// ---------------------------------------------------------------------------

namespace {

void write_log_line(std::ofstream& os, const LogEntry& e) {
  if (!os.is_open()) return;
  nlohmann::json j;
  j["iteration"] = e.iteration;
  j["rgb"] = e.loss.rgb;
  j["depth"] = e.loss.depth;
  j["normal"] = e.loss.normal;
  j["sky"] = e.loss.sky;
  j["total"] = e.loss.total;
  j["lr"] = e.lr;
  os << j.dump() << "\n";
  os.flush();
}

struct SceneFrameStats {
  Vec3 centroid = Vec3::Zero();
  double half_extent = 0.0;
};

SceneFrameStats frame_stats(const Dataset& ds, const std::vector<int>& indices) {
  SceneFrameStats st;
  Vec3 lo = ds.frames[indices[0]].pose.t, hi = lo;
  for (int i : indices) {
    st.centroid += ds.frames[i].pose.t;
    lo = lo.cwiseMin(ds.frames[i].pose.t);
    hi = hi.cwiseMax(ds.frames[i].pose.t);
  }
  st.centroid /= double(indices.size());
  st.half_extent = ((hi - lo) * 0.5).maxCoeff();
  return st;
}

TrainResult train_on_frames(const Dataset& ds, const std::vector<int>& indices,
                            const TrainConfig& cfg, const Vec3& centroid, double half_extent) {
  FieldConfig fcfg = cfg.field;
  int max_id = 0;
  for (const auto& f : ds.frames) max_id = std::max(max_id, f.id);
  fcfg.num_frames = max_id + 1;

  TrainResult out{RadianceField(fcfg, cfg.seed), {}};
  RadianceField& field = out.field;
  field.set_world_from_local(Sim3::translation(centroid));
  field.set_scene_scale(1.0 / std::max(half_extent, cfg.min_half_extent));
  field.render_camera = ds.camera_of(indices[0]);
  field.render_near = cfg.near;
  field.render_far = cfg.far;

  std::ofstream log_os;
  if (!cfg.log_path.empty()) {
    log_os.open(cfg.log_path);
    if (!log_os) throw DataError("cannot write training log: " + cfg.log_path);
  }

  LossGates gates{cfg.use_depth_loss, cfg.use_normal_loss, cfg.use_sky_loss};
  Rng rng(cfg.seed);
  AdamState adam;
  VecX grad(field.param_count());
  const double lr_ratio = cfg.lr_final / cfg.lr_init;

  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<BatchRay> batch = sample_batch(field, ds, indices, cfg, rng);
    grad.setZero();
    LossBreakdown loss = batch_loss(field, batch, cfg.loss_weights, gates, &grad);
    if (!std::isfinite(loss.total))
      throw NumericalError("non-finite loss at iteration " + std::to_string(it));
    if (!grad.allFinite())
      throw NumericalError("non-finite gradient at iteration " + std::to_string(it));

    double frac = cfg.iterations > 1 ? double(it) / double(cfg.iterations - 1) : 0.0;
    double lr = cfg.lr_init * std::pow(lr_ratio, frac);
    adam_step(field.params(), grad, adam, lr);

    if (it % cfg.log_interval == 0 || it + 1 == cfg.iterations) {
      LogEntry entry{it, loss, lr};
      out.log.push_back(entry);
      write_log_line(log_os, entry);
      if (cfg.verbose)
        std::cerr << "iter " << it << " total " << loss.total << " rgb " << loss.rgb
                  << " depth " << loss.depth << " normal " << loss.normal << " sky "
                  << loss.sky << "\n";
    }
    if (cfg.checkpoint_interval > 0 && !cfg.checkpoint_path.empty() &&
        (it + 1) % cfg.checkpoint_interval == 0)
      field.save(cfg.checkpoint_path);
  }

  if (!cfg.checkpoint_path.empty()) field.save(cfg.checkpoint_path);
  return out;
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  if (ds.train_indices.empty()) throw std::invalid_argument("train: dataset has no training frames");
  SceneFrameStats st = frame_stats(ds, ds.train_indices);
  return train_on_frames(ds, ds.train_indices, cfg, st.centroid, st.half_extent);
}

std::vector<SubmapTrainResult> train_submaps(const Dataset& ds, const Partition& partition,
                                             const TrainConfig& cfg) {
  if (partition.labels.size() != ds.frames.size())
    throw std::invalid_argument("train_submaps: partition does not cover all frames");

  std::vector<SubmapTrainResult> results;
  for (int c = 0; c < partition.k; ++c) {
    std::vector<int> indices;
    for (int i : ds.train_indices)
      if (partition.labels[i] == c) indices.push_back(i);
    if (indices.empty()) {
      std::cerr << "warning: submap " << c << " has no training frames, skipped\n";
      continue;
    }
    TrainConfig sub_cfg = cfg;
    sub_cfg.seed = cfg.seed + uint64_t(c) * 0x9e3779b97f4a7c15ull;
    if (!cfg.checkpoint_path.empty()) {
      fs::create_directories(cfg.checkpoint_path);
      char name[64];
      std::snprintf(name, sizeof(name), "submap_%03d.ckpt", c);
      sub_cfg.checkpoint_path = (fs::path(cfg.checkpoint_path) / name).string();
    }
    if (!cfg.log_path.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s.submap_%03d", cfg.log_path.c_str(), c);
      sub_cfg.log_path = name;
    }

    // Local-frame half extent around the cluster centroid.
    double half_extent = 0.0;
    Vec3 lo = ds.frames[indices[0]].pose.t, hi = lo;
    for (int i : indices) {
      lo = lo.cwiseMin(ds.frames[i].pose.t);
      hi = hi.cwiseMax(ds.frames[i].pose.t);
    }
    half_extent = ((hi - lo) * 0.5).maxCoeff();

    results.push_back(
        {c, train_on_frames(ds, indices, sub_cfg, partition.centroids[c], half_extent)});
  }
  return results;
}

}  // namespace lvnf
