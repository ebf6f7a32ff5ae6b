#pragma once

#include <optional>
#include <string>
#include <vector>

#include "membrane/types.hpp"

namespace membrane {

/// Rigid-motion parameter p = (alpha, tau): rotation angle about the normal
/// at the particle centre and a tangential translation vector at the centre.
struct MotionParam {
  double alpha = 0.0;
  Vec3 tau = Vec3::Zero();
};

/// One MotionParam per particle.
using Configuration = std::vector<MotionParam>;

/// A rigid particle attached to the membrane at finitely many points.
/// `points` are the ambient attachment points, `sites` their projections
/// onto the sphere and `heights` the attachment heights above it.
struct Particle {
  std::vector<Vec3> points;
  Vec3 centre = Vec3::Zero();
  std::vector<Vec3> sites;
  std::vector<double> heights;

  /// Build from ambient points. The centre defaults to the projection of the
  /// arithmetic mean of the points; an explicit height moves the
  /// corresponding point radially so that its attachment height matches.
  static Particle from_points(const std::vector<Vec3>& points, const ModelParams& params,
                              std::optional<Vec3> centre = std::nullopt,
                              const std::vector<std::optional<double>>& heights = {});

  /// Build from on-sphere sites and prescribed heights.
  static Particle from_sites(const std::vector<Vec3>& sites, const std::vector<double>& heights,
                             const ModelParams& params, std::optional<Vec3> centre = std::nullopt);
};

/// R_n(alpha): rotation of x by alpha about the axis through the origin in
/// direction nu(centre).
Vec3 rotate_about_normal(const Vec3& centre, double alpha, const Vec3& x);

/// R_T(tau): rotation by angle |tau| about the axis nu(centre) x tau/|tau|,
/// transporting the centre along the geodesic defined by tau. R_T(0) = id.
Vec3 translate_tangential(const Vec3& centre, const Vec3& tau, const Vec3& x);

/// phi(p, x) = R_T(tau) R_n(alpha) x relative to `centre`.
Vec3 rigid_motion(const Vec3& centre, const MotionParam& p, const Vec3& x);

/// Moves all points of the particle by phi(p, .) and re-derives sites and
/// heights (which the motion leaves unchanged).
Particle apply_motion(const Particle& particle, const MotionParam& p);

/// Initial velocity of the one-parameter motion s -> phi(s e, x):
///   (nu(centre) x tau) x x + alpha (nu(centre) x x).
Vec3 motion_velocity(const Vec3& centre, const MotionParam& e, const Vec3& x);

/// Angular velocity vector of the same motion, so that
/// motion_velocity(centre, e, x) = omega x x.
Vec3 motion_angular_velocity(const Vec3& centre, const MotionParam& e);

/// True iff the moved site sets are pairwise disjoint within 1e-8 R.
bool check_feasible(const std::vector<Particle>& particles, const Configuration& p,
                    const ModelParams& params);

/// All particles moved by their respective motion parameters.
std::vector<Particle> moved_particles(const std::vector<Particle>& particles,
                                      const Configuration& p);

/// Union of sites / heights over a particle list, in particle-then-site order.
void collect_sites(const std::vector<Particle>& particles, std::vector<Vec3>& sites,
                   std::vector<double>& heights);

/// Smallest distance between any two distinct sites across the union.
double min_site_separation(const std::vector<Particle>& particles);

/// Parses a particle definition file. Lines:
///   particle                 starts a new particle
///   centre X Y Z             optional explicit centre (projected onto the sphere)
///   point X Y Z [height H]   ambient attachment point, optional explicit height
/// '#' starts a comment.
std::vector<Particle> load_particle_file(const std::string& path, const ModelParams& params);

}  // namespace membrane
