#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "membrane/mesh.hpp"
#include "membrane/types.hpp"

namespace membrane {

using SparseMat = Eigen::SparseMatrix<double>;

/// Mass and stiffness forms of the P1 space on the triangulated surface.
/// Both are symmetric; the stiffness has the constants in its kernel.
struct Operators {
  SparseMat mass;
  SparseMat stiffness;
};

/// Assembles mass and stiffness with exact element integration. Parallel
/// over triangles with a deterministic per-row reduction: results are
/// bitwise independent of the thread count.
Operators assemble(const SurfaceMesh& mesh);

/// Plain serial triplet assembly, kept as the reference for testing.
Operators assemble_reference(const SurfaceMesh& mesh);

/// Point-evaluation operator: row i evaluates a P1 function at the radial
/// projection of sites[i] onto the mesh. Rows have at most 3 nonzeros
/// summing to 1. Duplicate sites are rejected.
SparseMat point_operator(const SurfaceMesh& mesh, const std::vector<Vec3>& sites);

/// Solution of the penalized, mean-zero constrained membrane minimization.
struct MembraneSolution {
  Eigen::VectorXd u;               // height field
  Eigen::VectorXd w;               // auxiliary field, w = u - Lap u weakly
  double mean_multiplier = 0.0;    // multiplier of the mean-zero constraint
  Eigen::VectorXd point_residuals; // E u - Z
  double energy = 0.0;             // J_h(u)
  double solver_residual = 0.0;    // relative KKT residual
  double mean_value = 0.0;         // integral of u over the mesh
  bool coplanar_warning = false;   // sites lie in a single plane
};

/// Minimizes J_h(u) + (beta/2)|E u - Z|^2 over the mean-zero P1 functions,
/// with the auxiliary field tied by the mass equation M w = (S + M) u. The
/// stationarity conditions form one sparse symmetric indefinite KKT system
/// solved by a direct factorization (MINRES fallback).
///
/// Requires at least 4 sites; coplanar sites raise the warning flag since
/// uniqueness is then not guaranteed. Pass precomputed operators to amortize
/// assembly over many solves on the same mesh.
MembraneSolution solve_membrane(const SurfaceMesh& mesh, const ModelParams& params,
                                const std::vector<Vec3>& sites,
                                const std::vector<double>& heights, double beta,
                                const Operators* ops = nullptr);

/// J_h(u): computes w by a mass solve, then integrates the three quadratic
/// terms element by element with exact quadrature.
double discrete_energy(const SurfaceMesh& mesh, const ModelParams& params,
                       const Eigen::VectorXd& u, const Operators* ops = nullptr);

/// Same integration given an already computed pair (u, w).
double energy_from_pair(const SurfaceMesh& mesh, const ModelParams& params,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& w);

/// The discrete bilinear form a_h(u, v) of the first variation, evaluated
/// through the operator matrices. J_h(u) = a_h(u, u)/2.
double energy_form(const SurfaceMesh& mesh, const ModelParams& params, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& v, const Operators* ops = nullptr);

/// Piecewise-constant tangential gradient of a P1 function on one triangle.
Vec3 element_gradient(const SurfaceMesh& mesh, const Eigen::VectorXd& u, int triangle_index);

namespace detail {

/// Area and barycentric basis gradients of a (flat) mesh triangle.
struct ElementGeometry {
  double area;
  Vec3 grad[3];
};

ElementGeometry element_geometry(const SurfaceMesh& mesh, int triangle_index);

/// True iff the union of sites lies in a single plane (within 1e-9 R).
bool sites_coplanar(const std::vector<Vec3>& sites, double radius);

}  // namespace detail

}  // namespace membrane
