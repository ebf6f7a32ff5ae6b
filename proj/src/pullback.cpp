#include "membrane/pullback.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace membrane {

namespace {

Mat3 projector(const Vec3& x) {
  const Vec3 nu = x.normalized();
  return Mat3::Identity() - nu * nu.transpose();
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace

SphereDiffeo rigid_rotation(const Mat3& q) {
  return {[q](const Vec3& x) { return Vec3(q * x); }, [q](const Vec3&) { return q; }};
}

SphereDiffeo rigid_rotation(const Vec3& axis, double angle) {
  return rigid_rotation(rotation_matrix(axis, angle));
}

SphereDiffeo axis_twist(double rate, double radius) {
  const double k = rate / radius;
  auto value = [k](const Vec3& x) {
    return Vec3(rotation_matrix(Vec3::UnitZ(), k * x.z()) * x);
  };
  auto jacobian = [k](const Vec3& x) {
    const double theta = k * x.z();
    const Mat3 rot = rotation_matrix(Vec3::UnitZ(), theta);
    Mat3 drot = Mat3::Zero();  // d/dtheta of the rotation
    drot(0, 0) = -std::sin(theta);
    drot(0, 1) = -std::cos(theta);
    drot(1, 0) = std::cos(theta);
    drot(1, 1) = -std::sin(theta);
    Mat3 jac = rot;
    jac.col(2) += k * (drot * x);
    return jac;
  };
  return {value, jacobian};
}

AnalyticFunction product_13() {
  return {[](const Vec3& x) { return x.x() * x.z(); },
          [](const Vec3& x) { return Vec3(x.z(), 0.0, x.x()); },
          [](const Vec3&) {
            Mat3 h = Mat3::Zero();
            h(0, 2) = h(2, 0) = 1.0;
            return h;
          }};
}

AnalyticFunction square_3() {
  return {[](const Vec3& x) { return x.z() * x.z(); },
          [](const Vec3& x) { return Vec3(0.0, 0.0, 2.0 * x.z()); },
          [](const Vec3&) {
            Mat3 h = Mat3::Zero();
            h(2, 2) = 2.0;
            return h;
          }};
}

AnalyticFunction saddle_12() {
  return {[](const Vec3& x) { return x.x() * x.x() - x.y() * x.y(); },
          [](const Vec3& x) { return Vec3(2.0 * x.x(), -2.0 * x.y(), 0.0); },
          [](const Vec3&) {
            Mat3 h = Mat3::Zero();
            h(0, 0) = 2.0;
            h(1, 1) = -2.0;
            return h;
          }};
}

Vec3 surface_gradient(const AnalyticFunction& fn, const Vec3& x, double /*radius*/) {
  return projector(x) * fn.gradient(x);
}

double surface_laplacian(const AnalyticFunction& fn, const Vec3& x, double radius) {
  const Vec3 nu = x.normalized();
  const Mat3 hess = fn.hessian(x);
  return hess.trace() - (2.0 / radius) * nu.dot(fn.gradient(x)) - nu.dot(hess * nu);
}

PullbackMatrices pullback_matrices(const SphereDiffeo& map, const Vec3& x, double radius) {
  const Mat3 P0 = projector(x);
  const Mat3 tangential_jac = map.jacobian(x) * P0;  // rows are grad_G X_i
  const Vec3 nu0 = x.normalized();
  const Vec3 nu1 = map.value(x).normalized();
  PullbackMatrices pm;
  pm.B = tangential_jac + nu1 * nu0.transpose();
  pm.G = tangential_jac.transpose() * tangential_jac + nu0 * nu0.transpose();
  pm.b = pm.B.determinant();
  (void)radius;
  return pm;
}

PullbackResiduals pullback_verify(const SphereDiffeo& map, const AnalyticFunction& fn,
                                  const std::vector<Vec3>& samples, double radius) {
  PullbackResiduals res;

  // grad_G0 of the pullback u o X through an ambient evaluation
  auto pulled_gradient = [&](const Vec3& x) -> Vec3 {
    return projector(x) * (map.jacobian(x).transpose() * fn.gradient(map.value(x)));
  };
  // F = b G^{-1} grad_G0(u o X), extended homogeneously off the sphere
  auto flux = [&](const Vec3& y) -> Vec3 {
    const Vec3 x = (radius / y.norm()) * y;
    const auto pm = pullback_matrices(map, x, radius);
    if (std::abs(pm.b) < 1e-14) throw std::runtime_error("pullback_verify: singular B");
    return pm.b * pm.G.inverse() * pulled_gradient(x);
  };

  for (const Vec3& x : samples) {
    const auto pm = pullback_matrices(map, x, radius);
    if (std::abs(pm.b) < 1e-14) throw std::runtime_error("pullback_verify: singular B");
    res.gram = std::max(res.gram, (pm.B.transpose() * pm.B - pm.G).norm());
    res.det_deviation_from_one = std::max(res.det_deviation_from_one, std::abs(pm.b - 1.0));

    const Vec3 lhs_grad = surface_gradient(fn, map.value(x), radius);
    const Vec3 rhs_grad = pm.B.transpose().inverse() * pulled_gradient(x);
    res.gradient = std::max(res.gradient, (lhs_grad - rhs_grad).norm());

    // tangential divergence of the flux by fourth-order central differences
    const double step = 3e-3 * radius;
    Mat3 jac;
    for (int j = 0; j < 3; ++j) {
      const Vec3 ej = Vec3::Unit(j);
      const Vec3 f1 = flux(x + step * ej), f_1 = flux(x - step * ej);
      const Vec3 f2 = flux(x + 2.0 * step * ej), f_2 = flux(x - 2.0 * step * ej);
      jac.col(j) = (8.0 * (f1 - f_1) - (f2 - f_2)) / (12.0 * step);
    }
    const double div = (projector(x).array() * jac.array()).sum();
    const double rhs_lap = div / pm.b;
    const double lhs_lap = surface_laplacian(fn, map.value(x), radius);
    res.laplacian = std::max(res.laplacian, std::abs(lhs_lap - rhs_lap));
  }
  return res;
}

}  // namespace membrane
