#include "membrane/geometry.hpp"

#include <cmath>

namespace membrane {

ClosestPoint closest_point(const Vec3& x, const ModelParams& params) {
  params.validate();
  const double norm = x.norm();
  if (norm == 0.0) throw std::domain_error("closest_point: projection undefined at the origin");
  ClosestPoint cp;
  cp.projection = (params.radius / norm) * x;
  cp.distance = norm - params.radius;
  return cp;
}

ShapeOperators shape_operators(const Vec3& x, const ModelParams& params) {
  params.validate();
  const double R = params.radius;
  if (std::abs(x.norm() - R) > 1e-9 * R)
    throw std::domain_error("shape_operators: point is not on the sphere");
  ShapeOperators ops;
  ops.normal = x.normalized();
  ops.projector = Mat3::Identity() - ops.normal * ops.normal.transpose();
  ops.weingarten = ops.projector / R;
  ops.mean_curvature = 2.0 / R;
  return ops;
}

}  // namespace membrane
