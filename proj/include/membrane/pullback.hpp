#pragma once

#include <functional>
#include <vector>

#include "membrane/types.hpp"

namespace membrane {

/// Analytic diffeomorphism of the sphere given by an ambient formula valid
/// in a neighbourhood, together with its ambient Jacobian.
struct SphereDiffeo {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> jacobian;
};

/// Rigid rotation x -> Q x.
SphereDiffeo rigid_rotation(const Mat3& q);
SphereDiffeo rigid_rotation(const Vec3& axis, double angle);

/// Axis-dependent twist: rotation about e3 by angle rate * x3 / R. Volume
/// preserving but not rigid.
SphereDiffeo axis_twist(double rate, double radius);

/// Analytic scalar test function with ambient derivatives.
struct AnalyticFunction {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<Mat3(const Vec3&)> hessian;
};

/// u = x1 x3.
AnalyticFunction product_13();
/// u = x3^2.
AnalyticFunction square_3();
/// u = x1^2 - x2^2.
AnalyticFunction saddle_12();

/// The pullback matrices at a surface point:
///   B = grad_G X + nu(X) (x) nu(x),  G = grad_G X^T grad_G X + nu (x) nu,
///   b = det B, with B^T B = G.
struct PullbackMatrices {
  Mat3 B;
  Mat3 G;
  double b;
};

PullbackMatrices pullback_matrices(const SphereDiffeo& map, const Vec3& x, double radius);

/// Maximal residuals of the pullback identities over the sample points:
///   gradient:  (grad_G1 u) o X = B^{-T} grad_G0 (u o X)
///   laplacian: (lap_G1 u) o X = (1/b) div_G0 ( b G^{-1} grad_G0 (u o X) )
///   gram:      G = B^T B
/// The surface divergence on the reference side is evaluated by fourth-order
/// finite differences of the homogeneous extension.
struct PullbackResiduals {
  double gradient = 0.0;
  double laplacian = 0.0;
  double gram = 0.0;
  double det_deviation_from_one = 0.0;  // max |b - 1| (informative; 0 for isometries)
};

PullbackResiduals pullback_verify(const SphereDiffeo& map, const AnalyticFunction& fn,
                                  const std::vector<Vec3>& samples, double radius);

/// Analytic surface gradient and Laplacian of an ambient function on the
/// sphere of radius R.
Vec3 surface_gradient(const AnalyticFunction& fn, const Vec3& x, double radius);
double surface_laplacian(const AnalyticFunction& fn, const Vec3& x, double radius);

}  // namespace membrane
