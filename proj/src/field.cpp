#include "lvnf/field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "lvnf/rng.hpp"

namespace lvnf {

namespace {

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<int> mlp_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

VecX RadianceField::encode_direction(const Vec3& d, int frequencies, bool identity) {
  VecX out(6 * frequencies + (identity ? 3 : 0));
  int at = 0;
  if (identity) {
    out.segment<3>(0) = d;
    at = 3;
  }
  double freq = 1.0;
  for (int f = 0; f < frequencies; ++f, freq *= 2.0) {
    for (int k = 0; k < 3; ++k) {
      out[at++] = std::sin(freq * d[k]);
      out[at++] = std::cos(freq * d[k]);
    }
  }
  return out;
}

RadianceField::RadianceField(const FieldConfig& cfg, uint64_t seed)
    : cfg_(cfg),
      grid_(cfg.grid),
      density_mlp_(mlp_dims(cfg.grid.levels * cfg.grid.feat, cfg.density_hidden, 1 + cfg.geo_dim)),
      color_mlp_(
          mlp_dims(cfg.geo_dim + cfg.dir_dim() + cfg.appearance_dim, cfg.color_hidden, 3)) {
  density_offset_ = grid_.param_count();
  color_offset_ = density_offset_ + density_mlp_.param_count();
  appearance_offset_ = color_offset_ + color_mlp_.param_count();
  params_.setZero(appearance_offset_ + cfg_.num_frames * cfg_.appearance_dim);
  init_params(seed);
}

void RadianceField::init_params(uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < grid_.param_count(); ++i) params_[i] = rng.uniform(-1e-4, 1e-4);

  auto init_mlp = [&](const Mlp& mlp, int offset, int in0, const std::vector<int>& hidden,
                      int out) {
    std::vector<int> dims = mlp_dims(in0, hidden, out);
    int at = offset;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
      double bound = std::sqrt(6.0 / dims[l]);
      for (int i = 0; i < dims[l + 1] * dims[l]; ++i) params_[at++] = rng.uniform(-bound, bound);
      at += dims[l + 1];  // biases stay zero
    }
    (void)mlp;
  };
  init_mlp(density_mlp_, density_offset_, cfg_.grid.levels * cfg_.grid.feat, cfg_.density_hidden,
           1 + cfg_.geo_dim);
  init_mlp(color_mlp_, color_offset_, cfg_.geo_dim + cfg_.dir_dim() + cfg_.appearance_dim,
           cfg_.color_hidden, 3);
  // appearance embeddings start at zero (also the default for unknown frames)
}

double RadianceField::eval_sigma(const Vec3& x, SampleTape& tape) const {
  Vec3 c = contract(x, cfg_.contraction);
  grid_.encode(params_.data(), c, tape.encoding, nullptr);
  density_mlp_.forward(params_.data() + density_offset_, tape.encoding, tape.density);
  tape.valid = false;  // sigma-only path keeps no state for backward
  return softplus(Mlp::output(tape.density)[0]);
}

SampleOutput RadianceField::eval(const Vec3& x, const Vec3& d, int frame_id, bool want_grad_sigma,
                                 SampleTape& tape) const {
  if (std::abs(d.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("RadianceField::eval: direction must be unit norm");

  Vec3 c = contract(x, cfg_.contraction);
  if (want_grad_sigma) {
    tape.contract_jac = contract_jacobian(x, cfg_.contraction);
    grid_.encode_jet(params_.data(), c, tape.encoding, tape.encoding_tangent, tape.grid);
    density_mlp_.forward_jet(params_.data() + density_offset_, tape.encoding,
                             tape.encoding_tangent, tape.density);
  } else {
    grid_.encode(params_.data(), c, tape.encoding, &tape.grid);
    density_mlp_.forward(params_.data() + density_offset_, tape.encoding, tape.density);
  }

  const VecX& dout = Mlp::output(tape.density);
  tape.sigma_pre = dout[0];
  tape.sigma = softplus(tape.sigma_pre);
  tape.has_grad_sigma = want_grad_sigma;
  if (want_grad_sigma) {
    Vec3 to0 = Mlp::output_tangent(tape.density).row(0).transpose();
    tape.grad_sigma_c = sigmoid(tape.sigma_pre) * to0;
    tape.grad_sigma = tape.contract_jac.transpose() * tape.grad_sigma_c;
  }

  // Color head: [geometry feature, encoded direction, appearance embedding].
  tape.color_input.resize(cfg_.geo_dim + cfg_.dir_dim() + cfg_.appearance_dim);
  tape.color_input.segment(0, cfg_.geo_dim) = dout.segment(1, cfg_.geo_dim);
  tape.color_input.segment(cfg_.geo_dim, cfg_.dir_dim()) =
      encode_direction(d, cfg_.dir_frequencies, cfg_.dir_identity);
  if (frame_id >= 0 && frame_id < cfg_.num_frames) {
    tape.color_input.segment(cfg_.geo_dim + cfg_.dir_dim(), cfg_.appearance_dim) =
        params_.segment(appearance_offset_ + frame_id * cfg_.appearance_dim, cfg_.appearance_dim);
  } else {
    tape.color_input.segment(cfg_.geo_dim + cfg_.dir_dim(), cfg_.appearance_dim).setZero();
  }
  tape.frame_id = frame_id;
  color_mlp_.forward(params_.data() + color_offset_, tape.color_input, tape.color);
  const VecX& cpre = Mlp::output(tape.color);
  for (int k = 0; k < 3; ++k) tape.rgb[k] = sigmoid(cpre[k]);
  tape.has_color = true;
  tape.valid = true;

  SampleOutput out;
  out.sigma = tape.sigma;
  out.rgb = tape.rgb;
  out.grad_sigma = tape.grad_sigma;
  out.has_grad_sigma = want_grad_sigma;
  return out;
}

void RadianceField::backward(const SampleTape& tape, double dsigma, const Vec3& drgb,
                             const Vec3& dgrad_sigma, VecX& grad) const {
  if (!tape.valid) throw std::logic_error("RadianceField::backward without forward");
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");

  // Color head (first order only).
  VecX dgeo = VecX::Zero(cfg_.geo_dim);
  if (drgb != Vec3::Zero() && tape.has_color) {
    VecX dcpre(3);
    for (int k = 0; k < 3; ++k) dcpre[k] = drgb[k] * tape.rgb[k] * (1.0 - tape.rgb[k]);
    VecX dcolor_in;
    color_mlp_.backward(params_.data() + color_offset_, tape.color, dcpre, &dcolor_in,
                        grad.data() + color_offset_);
    dgeo = dcolor_in.segment(0, cfg_.geo_dim);
    if (tape.frame_id >= 0 && tape.frame_id < cfg_.num_frames)
      grad.segment(appearance_offset_ + tape.frame_id * cfg_.appearance_dim,
                   cfg_.appearance_dim) +=
          dcolor_in.segment(cfg_.geo_dim + cfg_.dir_dim(), cfg_.appearance_dim);
  }

  // Density head output gradient: sigma through softplus, geometry feature
  // from the color head, plus second-order terms through the sigma tangent.
  VecX ddout = VecX::Zero(1 + cfg_.geo_dim);
  double sp = sigmoid(tape.sigma_pre);
  ddout[0] = dsigma * sp;
  ddout.segment(1, cfg_.geo_dim) = dgeo;

  if (tape.has_grad_sigma) {
    Vec3 dgrad_c = tape.contract_jac * dgrad_sigma;
    Vec3 to0 = Mlp::output_tangent(tape.density).row(0).transpose();
    ddout[0] += sp * (1.0 - sp) * to0.dot(dgrad_c);

    MatX3 dTout = MatX3::Zero(1 + cfg_.geo_dim, 3);
    dTout.row(0) = (sp * dgrad_c).transpose();

    VecX denc;
    MatX3 dTenc;
    density_mlp_.backward_jet(params_.data() + density_offset_, tape.density, ddout, dTout, &denc,
                              &dTenc, grad.data() + density_offset_);
    grid_.backward(tape.grid, denc, &dTenc, grad.data());
  } else {
    VecX denc;
    density_mlp_.backward(params_.data() + density_offset_, tape.density, ddout, &denc,
                          grad.data() + density_offset_);
    grid_.backward(tape.grid, denc, nullptr, grad.data());
  }
}

Vec3 RadianceField::density_gradient(const Vec3& x, SampleTape& tape) const {
  Vec3 c = contract(x, cfg_.contraction);
  tape.contract_jac = contract_jacobian(x, cfg_.contraction);
  grid_.encode_jet(params_.data(), c, tape.encoding, tape.encoding_tangent, tape.grid);
  density_mlp_.forward_jet(params_.data() + density_offset_, tape.encoding, tape.encoding_tangent,
                           tape.density);
  double sigma_pre = Mlp::output(tape.density)[0];
  Vec3 to0 = Mlp::output_tangent(tape.density).row(0).transpose();
  tape.valid = false;
  return tape.contract_jac.transpose() * (sigmoid(sigma_pre) * to0);
}

// ---------------------------------------------------------------------------
// Checkpoint format: "LVNF" magic, version, hyperparameters, scene placement,
// render metadata, then the raw little-endian parameter vector.

namespace {

constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_ints(std::ostream& os, const std::vector<int>& v) {
  put<uint32_t>(os, uint32_t(v.size()));
  for (int x : v) put<int32_t>(os, x);
}

std::vector<int> get_ints(std::istream& is) {
  uint32_t n = get<uint32_t>(is);
  std::vector<int> v(n);
  for (auto& x : v) x = get<int32_t>(is);
  return v;
}

}  // namespace

void RadianceField::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint: " + path);
  os.write("LVNF", 4);
  put<uint32_t>(os, kCheckpointVersion);
  put<int32_t>(os, cfg_.grid.levels);
  put<int32_t>(os, cfg_.grid.base_res);
  put<int32_t>(os, cfg_.grid.max_res);
  put<int32_t>(os, cfg_.grid.table_size);
  put<int32_t>(os, cfg_.grid.feat);
  put<int32_t>(os, cfg_.geo_dim);
  put_ints(os, cfg_.density_hidden);
  put_ints(os, cfg_.color_hidden);
  put<int32_t>(os, cfg_.appearance_dim);
  put<int32_t>(os, cfg_.num_frames);
  put<int32_t>(os, cfg_.dir_frequencies);
  put<uint8_t>(os, cfg_.dir_identity ? 1 : 0);
  put<uint8_t>(os, cfg_.contraction == ContractionType::L2 ? 1 : 0);
  put<double>(os, scene_scale_);
  put<double>(os, world_from_local_.s);
  put<double>(os, world_from_local_.q.x());
  put<double>(os, world_from_local_.q.y());
  put<double>(os, world_from_local_.q.z());
  put<double>(os, world_from_local_.q.w());
  for (int k = 0; k < 3; ++k) put<double>(os, world_from_local_.t[k]);
  put<double>(os, render_camera.fx);
  put<double>(os, render_camera.fy);
  put<double>(os, render_camera.cx);
  put<double>(os, render_camera.cy);
  put<int32_t>(os, render_camera.width);
  put<int32_t>(os, render_camera.height);
  put<double>(os, render_near);
  put<double>(os, render_far);
  put<uint64_t>(os, uint64_t(params_.size()));
  os.write(reinterpret_cast<const char*>(params_.data()),
           std::streamsize(sizeof(double) * params_.size()));
  if (!os) throw DataError("checkpoint write failed: " + path);
}

RadianceField RadianceField::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "LVNF", 4) != 0)
    throw DataError("not a checkpoint file: " + path);
  uint32_t version = get<uint32_t>(is);
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version in " + path);

  FieldConfig cfg;
  cfg.grid.levels = get<int32_t>(is);
  cfg.grid.base_res = get<int32_t>(is);
  cfg.grid.max_res = get<int32_t>(is);
  cfg.grid.table_size = get<int32_t>(is);
  cfg.grid.feat = get<int32_t>(is);
  cfg.geo_dim = get<int32_t>(is);
  cfg.density_hidden = get_ints(is);
  cfg.color_hidden = get_ints(is);
  cfg.appearance_dim = get<int32_t>(is);
  cfg.num_frames = get<int32_t>(is);
  cfg.dir_frequencies = get<int32_t>(is);
  cfg.dir_identity = get<uint8_t>(is) != 0;
  cfg.contraction = get<uint8_t>(is) ? ContractionType::L2 : ContractionType::InfNorm;

  RadianceField field(cfg, 0);
  field.scene_scale_ = get<double>(is);
  field.world_from_local_.s = get<double>(is);
  double qx = get<double>(is), qy = get<double>(is), qz = get<double>(is), qw = get<double>(is);
  field.world_from_local_.q = Quat(qw, qx, qy, qz);
  for (int k = 0; k < 3; ++k) field.world_from_local_.t[k] = get<double>(is);
  field.render_camera.fx = get<double>(is);
  field.render_camera.fy = get<double>(is);
  field.render_camera.cx = get<double>(is);
  field.render_camera.cy = get<double>(is);
  field.render_camera.width = get<int32_t>(is);
  field.render_camera.height = get<int32_t>(is);
  field.render_near = get<double>(is);
  field.render_far = get<double>(is);
  uint64_t n = get<uint64_t>(is);
  if (n != uint64_t(field.params_.size()))
    throw DataError("checkpoint parameter count mismatch in " + path);
  is.read(reinterpret_cast<char*>(field.params_.data()), std::streamsize(sizeof(double) * n));
  if (!is) throw DataError("truncated checkpoint: " + path);
  return field;
}

}  // namespace lvnf
