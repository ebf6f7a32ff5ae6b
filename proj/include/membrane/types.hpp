#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>

namespace membrane {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Physical parameters of the quadratic membrane energy on the sphere of
/// radius `radius`: bending rigidity `kappa` and surface tension `sigma`.
struct ModelParams {
  double kappa = 1.0;
  double sigma = 1.0;
  double radius = 1.0;

  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("ModelParams: kappa must be > 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("ModelParams: sigma must be >= 0");
    if (!(radius > 0.0)) throw std::invalid_argument("ModelParams: radius must be > 0");
  }
};

}  // namespace membrane
