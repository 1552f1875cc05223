#pragma once

#include <vector>

#include "lvnf/types.hpp"

namespace lvnf {

struct HashGridConfig {
  int levels = 8;
  int base_res = 16;
  int max_res = 512;
  int table_size = 1 << 15;  // entries per level
  int feat = 2;              // floats per entry
};

// Per-sample cache of corner indices and interpolation weights so the
// backward pass does not redo hashing.
struct HashGridTape {
  std::vector<uint32_t> idx;  // levels*8 table slots
  VecX w;                     // levels*8 trilinear weights
  MatX3 dw;                   // d w / d contracted position, filled when jet
  bool has_jet = false;
  bool valid = false;
};

// Multi-resolution hash-grid encoding with trilinear interpolation over the
// contracted domain (-2,2)^3. Feature tables live in an external flat
// parameter buffer of size param_count().
class HashGridEncoding {
 public:
  explicit HashGridEncoding(const HashGridConfig& cfg);

  const HashGridConfig& config() const { return cfg_; }
  int out_dim() const { return cfg_.levels * cfg_.feat; }
  int param_count() const { return cfg_.levels * cfg_.table_size * cfg_.feat; }
  int resolution(int level) const { return resolutions_[level]; }

  // out has out_dim() entries; tape optional for later backward.
  void encode(const double* tables, const Vec3& c, VecX& out, HashGridTape* tape = nullptr) const;

  // Also computes tangent = d out / d c (out_dim x 3). Tape required.
  void encode_jet(const double* tables, const Vec3& c, VecX& out, MatX3& tangent,
                  HashGridTape& tape) const;

  // Accumulates gradients into grad_tables (size param_count()); dtangent may
  // be null when the forward pass had no jet.
  void backward(const HashGridTape& tape, const VecX& dout, const MatX3* dtangent,
                double* grad_tables) const;

 private:
  HashGridConfig cfg_;
  std::vector<int> resolutions_;
};

}  // namespace lvnf
