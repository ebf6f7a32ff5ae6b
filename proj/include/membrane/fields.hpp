#pragma once

#include <vector>

#include "membrane/fem.hpp"
#include "membrane/mesh.hpp"
#include "membrane/particle.hpp"
#include "membrane/types.hpp"

namespace membrane {

/// C^inf plateau cutoff: 1 for |s| <= inner, 0 for |s| >= outer, smooth and
/// monotone non-increasing in |s| in between.
double smooth_cutoff(double s, double inner, double outer);

/// d/ds of smooth_cutoff.
double smooth_cutoff_derivative(double s, double inner, double outer);

enum class FieldKind { rotation_cutoff, curl_localized };

struct VectorFieldSpec {
  FieldKind kind = FieldKind::curl_localized;
  double r = 0.75;      // rotation_cutoff: cap radius (height along the centre axis)
  double eps = 0.15;    // rotation_cutoff: transition width
  double delta = 0.0;   // curl_localized: support parameter
};

/// Cutoff rotation field V(x) = eta(x) (centre/R x x): the full rotation
/// velocity about the centre axis inside the cap of height r, zero outside
/// the enlarged cap, with the cutoff depending only on the coordinate along
/// the axis (so the field is tangential and divergence free).
Vec3 rotation_field(const Vec3& centre, double r, double eps, const Vec3& x);

/// Divergence-free tangential field built as the surface curl of a stream
/// function supported on delta/2-balls around the constraint sites. At each
/// site it equals the rigid motion velocity of that particle's direction
/// component; it vanishes at all other particles' sites.
class CurlField {
 public:
  /// particles: already at the configuration of interest; e: per-particle
  /// direction (alpha, tau at the particle centre). Requires the sites to be
  /// pairwise separated by more than 2*delta.
  CurlField(const std::vector<Particle>& particles, const Configuration& e, double delta,
            const ModelParams& params);

  Vec3 operator()(const Vec3& y) const;

  double delta() const { return delta_; }

 private:
  struct SiteTerm {
    Vec3 site;
    Vec3 normal;  // nu at the site
    Vec3 omega;   // angular velocity of the owning particle's direction
  };
  std::vector<SiteTerm> terms_;
  double delta_ = 0.0;
  double radius_ = 1.0;
};

/// Convenience wrapper evaluating the curl field at one point.
Vec3 curl_field(const std::vector<Particle>& particles, const Configuration& p,
                const Configuration& e, double delta, const ModelParams& params, const Vec3& x);

/// Per-element strain data of an interpolated field: the tangential Jacobian
/// trace (discrete divergence) and A = (div V) I - grad V - grad V^T.
struct StrainTensor {
  Mat3 A;
  double div;
};

StrainTensor strain_tensor(const SurfaceMesh& mesh, const Eigen::Matrix3Xd& field_nodal,
                           int triangle_index);

}  // namespace membrane
