#include "lvnf/hash_grid.hpp"

#include <cmath>

namespace lvnf {

namespace {

constexpr uint32_t kPrimes[3] = {1u, 2654435761u, 805459861u};

inline uint32_t spatial_hash(uint32_t ix, uint32_t iy, uint32_t iz, uint32_t table_size) {
  return (ix * kPrimes[0] ^ iy * kPrimes[1] ^ iz * kPrimes[2]) % table_size;
}

}  // namespace

HashGridEncoding::HashGridEncoding(const HashGridConfig& cfg) : cfg_(cfg) {
  resolutions_.resize(cfg_.levels);
  double growth = cfg_.levels > 1
                      ? std::exp((std::log(double(cfg_.max_res)) - std::log(double(cfg_.base_res))) /
                                 (cfg_.levels - 1))
                      : 1.0;
  for (int l = 0; l < cfg_.levels; ++l)
    resolutions_[l] = int(std::floor(cfg_.base_res * std::pow(growth, l) + 0.5));
}

void HashGridEncoding::encode(const double* tables, const Vec3& c, VecX& out,
                              HashGridTape* tape) const {
  const int F = cfg_.feat;
  out.setZero(out_dim());
  if (tape) {
    tape->idx.resize(size_t(cfg_.levels) * 8);
    tape->w.setZero(cfg_.levels * 8);
    tape->has_jet = false;
    tape->valid = true;
  }
  for (int l = 0; l < cfg_.levels; ++l) {
    const int res = resolutions_[l];
    Vec3 s = (c.array() + 2.0) * 0.25 * res;
    int cell[3];
    double f[3];
    for (int k = 0; k < 3; ++k) {
      cell[k] = std::min(std::max(int(std::floor(s[k])), 0), res - 1);
      f[k] = std::min(std::max(s[k] - cell[k], 0.0), 1.0);
    }
    for (int corner = 0; corner < 8; ++corner) {
      double w = 1.0;
      uint32_t ic[3];
      for (int k = 0; k < 3; ++k) {
        int b = (corner >> k) & 1;
        w *= b ? f[k] : 1.0 - f[k];
        ic[k] = uint32_t(cell[k] + b);
      }
      uint32_t idx = spatial_hash(ic[0], ic[1], ic[2], uint32_t(cfg_.table_size));
      const double* entry = tables + (size_t(l) * cfg_.table_size + idx) * F;
      for (int fi = 0; fi < F; ++fi) out[l * F + fi] += w * entry[fi];
      if (tape) {
        tape->idx[size_t(l) * 8 + corner] = idx;
        tape->w[l * 8 + corner] = w;
      }
    }
  }
}

void HashGridEncoding::encode_jet(const double* tables, const Vec3& c, VecX& out, MatX3& tangent,
                                  HashGridTape& tape) const {
  const int F = cfg_.feat;
  out.setZero(out_dim());
  tangent.setZero(out_dim(), 3);
  tape.idx.resize(size_t(cfg_.levels) * 8);
  tape.w.setZero(cfg_.levels * 8);
  tape.dw.setZero(cfg_.levels * 8, 3);
  tape.has_jet = true;
  tape.valid = true;

  for (int l = 0; l < cfg_.levels; ++l) {
    const int res = resolutions_[l];
    const double dsdc = 0.25 * res;  // d (grid coord) / d (contracted coord)
    Vec3 s = (c.array() + 2.0) * dsdc;
    int cell[3];
    double f[3];
    for (int k = 0; k < 3; ++k) {
      cell[k] = std::min(std::max(int(std::floor(s[k])), 0), res - 1);
      f[k] = std::min(std::max(s[k] - cell[k], 0.0), 1.0);
    }
    for (int corner = 0; corner < 8; ++corner) {
      double fac[3], dfac[3];
      uint32_t ic[3];
      for (int k = 0; k < 3; ++k) {
        int b = (corner >> k) & 1;
        fac[k] = b ? f[k] : 1.0 - f[k];
        dfac[k] = b ? 1.0 : -1.0;
        ic[k] = uint32_t(cell[k] + b);
      }
      double w = fac[0] * fac[1] * fac[2];
      Vec3 dw(dfac[0] * fac[1] * fac[2], fac[0] * dfac[1] * fac[2], fac[0] * fac[1] * dfac[2]);
      dw *= dsdc;

      uint32_t idx = spatial_hash(ic[0], ic[1], ic[2], uint32_t(cfg_.table_size));
      const double* entry = tables + (size_t(l) * cfg_.table_size + idx) * F;
      for (int fi = 0; fi < F; ++fi) {
        out[l * F + fi] += w * entry[fi];
        tangent.row(l * F + fi) += entry[fi] * dw.transpose();
      }
      tape.idx[size_t(l) * 8 + corner] = idx;
      tape.w[l * 8 + corner] = w;
      tape.dw.row(l * 8 + corner) = dw.transpose();
    }
  }
}

void HashGridEncoding::backward(const HashGridTape& tape, const VecX& dout, const MatX3* dtangent,
                                double* grad_tables) const {
  const int F = cfg_.feat;
  for (int l = 0; l < cfg_.levels; ++l) {
    for (int corner = 0; corner < 8; ++corner) {
      const size_t slot = size_t(l) * 8 + corner;
      const double w = tape.w[slot];
      double* gentry = grad_tables + (size_t(l) * cfg_.table_size + tape.idx[slot]) * F;
      for (int fi = 0; fi < F; ++fi) {
        double g = w * dout[l * F + fi];
        if (dtangent && tape.has_jet) g += dtangent->row(l * F + fi).dot(tape.dw.row(slot));
        gentry[fi] += g;
      }
    }
  }
}

}  // namespace lvnf
