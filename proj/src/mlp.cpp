#include "lvnf/mlp.hpp"

namespace lvnf {

namespace {

using WMap = Eigen::Map<const RowMat>;
using WGradMap = Eigen::Map<RowMat>;
using BMap = Eigen::Map<const VecX>;
using BGradMap = Eigen::Map<VecX>;

}  // namespace

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  offsets_.resize(num_layers());
  int off = 0;
  for (int i = 0; i < num_layers(); ++i) {
    offsets_[i] = off;
    off += dims_[i + 1] * dims_[i] + dims_[i + 1];
  }
  param_count_ = off;
}

MlpTape Mlp::make_tape() const {
  MlpTape tape;
  tape.a.resize(dims_.size());
  tape.Ta.resize(dims_.size());
  tape.Tz.resize(dims_.size());
  for (size_t i = 0; i < dims_.size(); ++i) {
    tape.a[i].setZero(dims_[i]);
    tape.Ta[i].setZero(dims_[i], 3);
    tape.Tz[i].setZero(dims_[i], 3);
  }
  return tape;
}

void Mlp::forward(const double* p, const VecX& x, MlpTape& tape) const {
  if (tape.a.size() != dims_.size()) tape = make_tape();
  tape.a[0] = x;
  for (int i = 0; i < num_layers(); ++i) {
    const int in = dims_[i], out = dims_[i + 1];
    WMap W(p + offsets_[i], out, in);
    BMap b(p + offsets_[i] + out * in, out);
    tape.a[i + 1].noalias() = W * tape.a[i];
    tape.a[i + 1] += b;
    if (i + 1 < num_layers()) tape.a[i + 1] = tape.a[i + 1].array().tanh();
  }
  tape.has_jet = false;
  tape.valid = true;
}

void Mlp::forward_jet(const double* p, const VecX& x, const MatX3& Tx, MlpTape& tape) const {
  if (tape.a.size() != dims_.size()) tape = make_tape();
  tape.a[0] = x;
  tape.Ta[0] = Tx;
  for (int i = 0; i < num_layers(); ++i) {
    const int in = dims_[i], out = dims_[i + 1];
    WMap W(p + offsets_[i], out, in);
    BMap b(p + offsets_[i] + out * in, out);
    tape.a[i + 1].noalias() = W * tape.a[i];
    tape.a[i + 1] += b;
    tape.Tz[i + 1].noalias() = W * tape.Ta[i];
    if (i + 1 < num_layers()) {
      tape.a[i + 1] = tape.a[i + 1].array().tanh();
      // d tanh = 1 - tanh^2
      tape.Ta[i + 1] = (1.0 - tape.a[i + 1].array().square()).matrix().asDiagonal() * tape.Tz[i + 1];
    } else {
      tape.Ta[i + 1] = tape.Tz[i + 1];
    }
  }
  tape.has_jet = true;
  tape.valid = true;
}

void Mlp::backward(const double* p, const MlpTape& tape, const VecX& dout, VecX* dx,
                   double* gp) const {
  if (!tape.valid) throw std::logic_error("Mlp::backward called without a forward pass");
  VecX abar = dout;
  for (int i = num_layers() - 1; i >= 0; --i) {
    const int in = dims_[i], out = dims_[i + 1];
    WMap W(p + offsets_[i], out, in);
    VecX zbar;
    if (i + 1 < num_layers())
      zbar = (1.0 - tape.a[i + 1].array().square()) * abar.array();
    else
      zbar = abar;
    if (gp) {
      WGradMap gW(gp + offsets_[i], out, in);
      BGradMap gb(gp + offsets_[i] + out * in, out);
      gW.noalias() += zbar * tape.a[i].transpose();
      gb += zbar;
    }
    abar.noalias() = W.transpose() * zbar;
  }
  if (dx) *dx = abar;
}

void Mlp::backward_jet(const double* p, const MlpTape& tape, const VecX& dout, const MatX3& dTout,
                       VecX* dx, MatX3* dTx, double* gp) const {
  if (!tape.valid || !tape.has_jet)
    throw std::logic_error("Mlp::backward_jet called without a jet forward pass");
  VecX abar = dout;
  MatX3 Tabar = dTout;
  for (int i = num_layers() - 1; i >= 0; --i) {
    const int in = dims_[i], out = dims_[i + 1];
    WMap W(p + offsets_[i], out, in);
    VecX zbar;
    MatX3 Tzbar;
    if (i + 1 < num_layers()) {
      // a = tanh(z); Ta = (1-a^2) Tz. Includes the second-derivative
      // coupling: dL/dz += (-2a)(1-a^2) (Tz . Tabar per row).
      Eigen::ArrayXd one_minus_a2 = 1.0 - tape.a[i + 1].array().square();
      Eigen::ArrayXd rowdot = (tape.Tz[i + 1].array() * Tabar.array()).rowwise().sum();
      zbar = (one_minus_a2 * abar.array() +
              (-2.0 * tape.a[i + 1].array()) * one_minus_a2 * rowdot)
                 .matrix();
      Tzbar = one_minus_a2.matrix().asDiagonal() * Tabar;
    } else {
      zbar = abar;
      Tzbar = Tabar;
    }
    if (gp) {
      WGradMap gW(gp + offsets_[i], out, in);
      BGradMap gb(gp + offsets_[i] + out * in, out);
      gW.noalias() += zbar * tape.a[i].transpose();
      gW.noalias() += Tzbar * tape.Ta[i].transpose();
      gb += zbar;
    }
    abar.noalias() = W.transpose() * zbar;
    Tabar.noalias() = W.transpose() * Tzbar;
  }
  if (dx) *dx = abar;
  if (dTx) *dTx = Tabar;
}

}  // namespace lvnf
