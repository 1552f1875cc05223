#pragma once

#include "lvnf/types.hpp"

namespace lvnf {

enum class ContractionType { InfNorm, L2 };

// Squashes unbounded space into the open cube (-2, 2)^3: identity for
// ||x||_inf <= 1, otherwise (2 - 1/||x||)*(x/||x||). Continuous and injective.
Vec3 contract(const Vec3& x, ContractionType type = ContractionType::InfNorm);

// Jacobian d contract / d x. Piecewise smooth; at the unit shell the inside
// branch (identity) is returned.
Mat3 contract_jacobian(const Vec3& x, ContractionType type = ContractionType::InfNorm);

}  // namespace lvnf
