#include "lvnf/contraction.hpp"

#include <cmath>

namespace lvnf {

namespace {

// Index of the largest-magnitude component.
int argmax_abs(const Vec3& x) {
  int k = 0;
  if (std::abs(x[1]) > std::abs(x[k])) k = 1;
  if (std::abs(x[2]) > std::abs(x[k])) k = 2;
  return k;
}

}  // namespace

Vec3 contract(const Vec3& x, ContractionType type) {
  if (!x.allFinite()) throw std::invalid_argument("contract: non-finite input");
  double m = type == ContractionType::InfNorm ? x.cwiseAbs().maxCoeff() : x.norm();
  if (m <= 1.0) return x;
  return (2.0 - 1.0 / m) * (x / m);
}

Mat3 contract_jacobian(const Vec3& x, ContractionType type) {
  if (!x.allFinite()) throw std::invalid_argument("contract_jacobian: non-finite input");
  double m = type == ContractionType::InfNorm ? x.cwiseAbs().maxCoeff() : x.norm();
  if (m <= 1.0) return Mat3::Identity();

  double alpha = (2.0 - 1.0 / m) / m;
  double dalpha = -2.0 / (m * m) + 2.0 / (m * m * m);

  Vec3 dm_dx;
  if (type == ContractionType::InfNorm) {
    int k = argmax_abs(x);
    dm_dx = Vec3::Zero();
    dm_dx[k] = x[k] >= 0.0 ? 1.0 : -1.0;
  } else {
    dm_dx = x / m;
  }
  return alpha * Mat3::Identity() + dalpha * x * dm_dx.transpose();
}

}  // namespace lvnf
