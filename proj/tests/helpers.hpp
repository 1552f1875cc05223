#pragma once

#include <cmath>

#include "lvnf/field.hpp"
#include "lvnf/rng.hpp"

namespace lvnf::testutil {

// Tiny field (<= 200 parameters) for exhaustive finite-difference checks.
inline FieldConfig toy_field_config() {
  FieldConfig cfg;
  cfg.grid.levels = 2;
  cfg.grid.base_res = 4;
  cfg.grid.max_res = 8;
  cfg.grid.table_size = 8;
  cfg.grid.feat = 2;
  cfg.geo_dim = 3;
  cfg.density_hidden = {6};
  cfg.color_hidden = {6};
  cfg.appearance_dim = 2;
  cfg.num_frames = 2;
  cfg.dir_frequencies = 1;
  cfg.dir_identity = false;
  return cfg;
}

// Random point at least `margin` cell-widths from every level's trilinear
// faces (where the interpolation gradient is discontinuous) and away from the
// contraction kinks.
inline Vec3 interior_point(const RadianceField& field, Rng& rng, double lo = -1.8,
                           double hi = 1.8, double margin = 1e-3) {
  const auto& grid = field.grid();
  for (;;) {
    Vec3 x = rng.uniform_vec3(lo, hi);
    double m = x.cwiseAbs().maxCoeff();
    if (std::abs(m - 1.0) < 1e-2) continue;
    if (m > 1.0) {
      Vec3 s = x.cwiseAbs();
      std::sort(s.data(), s.data() + 3);
      if (s[2] - s[1] < 1e-2) continue;  // argmax tie: contraction kink
    }
    Vec3 c = contract(x, field.config().contraction);
    bool ok = true;
    for (int l = 0; l < grid.config().levels && ok; ++l) {
      double res = grid.resolution(l);
      for (int k = 0; k < 3; ++k) {
        double sgrid = (c[k] + 2.0) * 0.25 * res;
        double f = sgrid - std::floor(sgrid);
        if (f < margin || f > 1.0 - margin) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return x;
  }
}

// Larger-than-init random parameters so gradients are well scaled for FD.
inline void randomize_params(RadianceField& field, uint64_t seed, double feat_scale = 0.5) {
  Rng rng(seed);
  VecX& p = field.params();
  for (int i = 0; i < field.density_offset(); ++i) p[i] = rng.uniform(-feat_scale, feat_scale);
  for (int i = field.appearance_offset(); i < int(p.size()); ++i) p[i] = rng.uniform(-0.3, 0.3);
}

}  // namespace lvnf::testutil
