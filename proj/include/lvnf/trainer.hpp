#pragma once

#include <string>
#include <vector>

#include "lvnf/dataset.hpp"
#include "lvnf/field.hpp"
#include "lvnf/losses.hpp"
#include "lvnf/rng.hpp"
#include "lvnf/sampling.hpp"
#include "lvnf/spectral.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct AdamState {
  VecX m, v;
  int64_t step = 0;
};

// Standard bias-corrected Adam update in place.
void adam_step(VecX& params, const VecX& grads, AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-15);

struct TrainConfig {
  FieldConfig field;
  int iterations = 10000;
  int rays_per_iteration = 4096;
  double lr_init = 1e-2;
  double lr_final = 1e-3;
  LossWeights loss_weights;
  double sigma_hat = 0.05;  // depth prior std, metres
  bool use_depth_loss = true;
  bool use_normal_loss = true;
  bool use_sky_loss = true;
  int n_coarse = 64;
  int n_fine = 64;
  double near = 0.1;
  double far = 120.0;
  double min_half_extent = 2.0;  // floor on the normalization extent, metres
  uint64_t seed = 0;
  int log_interval = 100;
  int checkpoint_interval = 0;   // extra periodic checkpoints when > 0
  std::string checkpoint_path;   // final checkpoint (train) / directory (submaps)
  std::string log_path;          // JSONL loss log
  bool verbose = false;
};

// One training ray in the field's normalized local frame with frozen sample
// positions. Loss and gradient are exact functions of the field parameters
// given a fixed batch, which is what the finite-difference checks differentiate.
struct BatchRay {
  Vec3 origin = Vec3::Zero();
  Vec3 dir = Vec3::UnitZ();
  int frame_id = -1;
  SampleSet samples;
  RaySupervision sup;  // depth target in normalized units
};

struct LossGates {
  bool depth = true;
  bool normal = true;
  bool sky = true;
};

// Forward pass of the full objective on a fixed batch; accumulates parameter
// gradients into *grad when given (grad must be zeroed by the caller).
LossBreakdown batch_loss(const RadianceField& field, const std::vector<BatchRay>& batch,
                         const LossWeights& lw, const LossGates& gates, VecX* grad);

// Draws rays_per_iteration pixels uniformly over the listed frames' pixels,
// attaches the available supervision, and freezes per-ray sample positions
// (stratified + importance against the current field).
std::vector<BatchRay> sample_batch(const RadianceField& field, const Dataset& ds,
                                   const std::vector<int>& frame_indices, const TrainConfig& cfg,
                                   Rng& rng);

struct LogEntry {
  int iteration = 0;
  LossBreakdown loss;
  double lr = 0.0;
};

struct TrainResult {
  RadianceField field;
  std::vector<LogEntry> log;
};

TrainResult train(const Dataset& ds, const TrainConfig& cfg);

struct SubmapTrainResult {
  int cluster = 0;
  TrainResult result;
};

// Independently trains one field per cluster in its centroid-origin local
// frame. Empty clusters are skipped with a warning on stderr.
std::vector<SubmapTrainResult> train_submaps(const Dataset& ds, const Partition& partition,
                                             const TrainConfig& cfg);

}  // namespace lvnf
