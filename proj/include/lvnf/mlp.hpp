#pragma once

#include <vector>

#include "lvnf/types.hpp"

namespace lvnf {

// Forward activations plus (optionally) spatial tangents d(activation)/d(position),
// kept so backward can run without re-evaluating. Reusable across samples.
struct MlpTape {
  std::vector<VecX> a;    // a[0] = input, a[i] = layer-i output
  std::vector<MatX3> Ta;  // tangents of a
  std::vector<MatX3> Tz;  // tangents of pre-activations
  bool has_jet = false;
  bool valid = false;
};

// Fully-connected network: tanh on hidden layers, linear output. Parameters
// (row-major W then b per layer) live in an external flat buffer; the jet
// variants carry 3-column position tangents through every layer so losses on
// the spatial gradient of the output can be backpropagated to parameters.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> dims);

  int param_count() const { return param_count_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int num_layers() const { return int(dims_.size()) - 1; }

  MlpTape make_tape() const;

  void forward(const double* p, const VecX& x, MlpTape& tape) const;
  void forward_jet(const double* p, const VecX& x, const MatX3& Tx, MlpTape& tape) const;

  static const VecX& output(const MlpTape& tape) { return tape.a.back(); }
  static const MatX3& output_tangent(const MlpTape& tape) { return tape.Ta.back(); }

  // Accumulates parameter gradients into gp (size param_count()); optionally
  // returns the gradient w.r.t. the input vector. Throws if the tape was not
  // produced by a forward pass.
  void backward(const double* p, const MlpTape& tape, const VecX& dout, VecX* dx,
                double* gp) const;

  // Backward when the loss also depends on the output tangent.
  void backward_jet(const double* p, const MlpTape& tape, const VecX& dout, const MatX3& dTout,
                    VecX* dx, MatX3* dTx, double* gp) const;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;  // per-layer offset of W (b follows W)
  int param_count_ = 0;
};

}  // namespace lvnf
