#pragma once

#include "membrane/types.hpp"

namespace membrane {

struct ClosestPoint {
  Vec3 projection;  // on the sphere
  double distance;  // signed oriented distance, positive outside
};

/// Curvature data of the sphere at a surface point: outward unit normal,
/// tangent-plane projector P = I - nu nu^T, extended Weingarten map P/R and
/// mean curvature H = 2/R (sum of principal curvatures).
struct ShapeOperators {
  Vec3 normal;
  Mat3 projector;
  Mat3 weingarten;
  double mean_curvature;
};

/// Closest point projection pi(X) = R X/|X| with signed distance d(X) = |X|-R,
/// so that X = pi(X) + d(X) pi(X)/R.
ClosestPoint closest_point(const Vec3& x, const ModelParams& params);

/// Requires | |x| - R | <= 1e-9 R.
ShapeOperators shape_operators(const Vec3& x, const ModelParams& params);

}  // namespace membrane
