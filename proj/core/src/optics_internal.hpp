#pragma once

#include "tactile/optics.hpp"

namespace tactile::optics::detail {

// Precomputed density evaluator for one surface model.
class BsdfEval {
 public:
  BsdfEval(const ScatterSurface& surface, double specular_acceptance_rad);
  double operator()(const Vec3& incident, const Vec3& normal, const Vec3& outgoing) const;

 private:
  ScatterSurface surface_;
  double two_sigma_sq_ = 1.0;
  double gauss_norm_ = 1.0;
  double cos_accept_ = 1.0;
  double accept_density_ = 0.0;
};

void orthonormal_basis(const Vec3& n, Vec3& u, Vec3& v);

}  // namespace tactile::optics::detail
