#pragma once

#include <string>
#include <vector>

#include "lvnf/camera.hpp"
#include "lvnf/contraction.hpp"
#include "lvnf/hash_grid.hpp"
#include "lvnf/mlp.hpp"
#include "lvnf/sim3.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct FieldConfig {
  HashGridConfig grid;
  int geo_dim = 15;                       // geometry feature width fed to the color head
  std::vector<int> density_hidden = {64};
  std::vector<int> color_hidden = {64, 64};
  int appearance_dim = 8;
  int num_frames = 1;                     // appearance table rows
  int dir_frequencies = 4;
  bool dir_identity = true;               // append raw direction to the encoding
  ContractionType contraction = ContractionType::InfNorm;

  int dir_dim() const { return 6 * dir_frequencies + (dir_identity ? 3 : 0); }
};

// Everything cached by one sample evaluation, reusable across samples.
struct SampleTape {
  HashGridTape grid;
  MlpTape density;
  MlpTape color;
  Mat3 contract_jac = Mat3::Identity();
  VecX encoding;
  MatX3 encoding_tangent;
  VecX color_input;
  int frame_id = -1;
  double sigma_pre = 0.0;
  double sigma = 0.0;
  Vec3 grad_sigma_c = Vec3::Zero();  // d sigma / d contracted position
  Vec3 grad_sigma = Vec3::Zero();    // d sigma / d input position
  Vec3 rgb = Vec3::Zero();
  bool has_grad_sigma = false;
  bool has_color = false;
  bool valid = false;
};

struct SampleOutput {
  double sigma = 0.0;
  Vec3 rgb = Vec3::Zero();
  Vec3 grad_sigma = Vec3::Zero();
  bool has_grad_sigma = false;
};

// Hash-grid radiance field: density + geometry feature from position, color
// from geometry feature, encoded view direction and a per-frame appearance
// embedding. All learnable values live in one flat parameter vector.
//
// Positions are in the field's normalized local frame; `scene_scale` maps
// local metric coordinates into it and `world_from_local` places the local
// frame in the world (used by submaps).
class RadianceField {
 public:
  explicit RadianceField(const FieldConfig& cfg, uint64_t seed = 42);

  const FieldConfig& config() const { return cfg_; }
  int param_count() const { return int(params_.size()); }
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }

  double scene_scale() const { return scene_scale_; }
  void set_scene_scale(double s) { scene_scale_ = s; }
  const Sim3& world_from_local() const { return world_from_local_; }
  void set_world_from_local(const Sim3& t) { world_from_local_ = t; }

  // Rendering metadata carried in checkpoints so `render` is self-contained.
  PinholeCamera render_camera;
  double render_near = 0.1;
  double render_far = 120.0;

  // Density only (importance-sampling pass). Position in normalized frame.
  double eval_sigma(const Vec3& x, SampleTape& tape) const;

  // Full evaluation. Direction must be unit within 1e-6. want_grad_sigma
  // additionally computes d sigma / d x analytically and makes the normal
  // path differentiable in backward().
  SampleOutput eval(const Vec3& x, const Vec3& d, int frame_id, bool want_grad_sigma,
                    SampleTape& tape) const;

  // Accumulates d loss / d params into grad given the upstream gradients at
  // this sample's outputs. dgrad_sigma is ignored unless the forward pass
  // requested the density gradient. Throws if the tape is not valid.
  void backward(const SampleTape& tape, double dsigma, const Vec3& drgb, const Vec3& dgrad_sigma,
                VecX& grad) const;

  Vec3 density_gradient(const Vec3& x, SampleTape& tape) const;

  // Flat-parameter layout.
  int grid_offset() const { return 0; }
  int density_offset() const { return density_offset_; }
  int color_offset() const { return color_offset_; }
  int appearance_offset() const { return appearance_offset_; }

  const HashGridEncoding& grid() const { return grid_; }

  void save(const std::string& path) const;
  static RadianceField load(const std::string& path);

  static VecX encode_direction(const Vec3& d, int frequencies, bool identity);

 private:
  FieldConfig cfg_;
  HashGridEncoding grid_;
  Mlp density_mlp_;
  Mlp color_mlp_;
  VecX params_;
  double scene_scale_ = 1.0;
  Sim3 world_from_local_;
  int density_offset_ = 0;
  int color_offset_ = 0;
  int appearance_offset_ = 0;

  void init_params(uint64_t seed);
};

}  // namespace lvnf
