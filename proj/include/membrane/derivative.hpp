#pragma once

#include <optional>
#include <vector>

#include "membrane/fem.hpp"
#include "membrane/fields.hpp"
#include "membrane/particle.hpp"

namespace membrane {

struct DerivativeReport {
  Configuration direction;
  double formula_value = 0.0;
  std::optional<double> dq_value;
  std::optional<double> energy_minus, energy_zero, energy_plus;
  double mesh_h = 0.0;
};

/// E_h(p): moves the particles by p, solves, returns J_h(u_h(p)).
double config_energy(const SurfaceMesh& mesh, const ModelParams& params,
                     const std::vector<Particle>& particles, const Configuration& p, double beta,
                     const Operators* ops = nullptr);

/// Same, returning the full solution together with the moved particles.
MembraneSolution solve_configuration(const SurfaceMesh& mesh, const ModelParams& params,
                                     const std::vector<Particle>& particles,
                                     const Configuration& p, double beta,
                                     std::vector<Particle>* moved = nullptr,
                                     const Operators* ops = nullptr);

/// The explicit derivative functional evaluated on a computed solution pair
/// (u, w) and the nodal interpolant of a perturbation field V:
///   -kappa int  (div V)(u-w)^2/2 + grad(u-w) . A grad u
///   + (sigma - 2 kappa/R^2)/2 int  grad u . A grad u
///   - sigma/R^2 int (div V) u^2,
/// with A the per-element strain of V. One pass over the triangles with
/// element-constant gradients and exact quadrature; linear in V.
double derivative_functional(const SurfaceMesh& mesh, const ModelParams& params,
                             const MembraneSolution& solution,
                             const Eigen::Matrix3Xd& field_nodal);

/// Serial reference implementation kept for testing.
double derivative_functional_reference(const SurfaceMesh& mesh, const ModelParams& params,
                                       const MembraneSolution& solution,
                                       const Eigen::Matrix3Xd& field_nodal);

/// Central difference quotient of the configurational energy along e.
double difference_quotient(const SurfaceMesh& mesh, const ModelParams& params,
                           const std::vector<Particle>& particles, const Configuration& p,
                           const Configuration& e, double step, double beta,
                           const Operators* ops = nullptr);

/// Default curl-field support: 3 h clamped below half the minimal site
/// separation.
double default_curl_delta(const SurfaceMesh& mesh, const std::vector<Particle>& particles);

/// Derivative of E_h at configuration p in direction e, via the curl field
/// and the explicit functional. Reuses a solution computed at p if provided.
double config_derivative(const SurfaceMesh& mesh, const ModelParams& params,
                         const std::vector<Particle>& particles, const Configuration& p,
                         const Configuration& e, double beta,
                         const MembraneSolution* solution = nullptr, double delta = 0.0,
                         const Operators* ops = nullptr);

/// Orthonormal tangent pair at a centre: Gram-Schmidt on the projections of
/// the coordinate axes, largest norm first.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& centre);

struct ParticleGradient {
  double d_alpha = 0.0;
  Vec3 tangent1 = Vec3::Zero(), tangent2 = Vec3::Zero();
  double d_tangent1 = 0.0, d_tangent2 = 0.0;
};

/// Full gradient: one membrane solve, then 3N functional evaluations with
/// curl fields for rotation and the two canonical tangent translations at
/// each particle centre.
std::vector<ParticleGradient> config_gradient(const SurfaceMesh& mesh, const ModelParams& params,
                                              const std::vector<Particle>& particles,
                                              const Configuration& p, double beta,
                                              double delta = 0.0, const Operators* ops = nullptr);

}  // namespace membrane
