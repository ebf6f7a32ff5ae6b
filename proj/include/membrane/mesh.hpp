#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "membrane/types.hpp"

namespace membrane {

/// Triangulated icosphere. Vertices lie on the exact sphere of radius
/// `radius`; triangles are consistently oriented outward.
///
/// The base icosahedron is pole-aligned with an upper-ring vertex at
/// longitude 0, so the plane y = 0 is a reflection symmetry of every
/// refinement and from level 2 on the six points (0,0,±R), (±R,0,0),
/// (0,±R,0) are mesh vertices.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  int refinement_level = 0;
  double radius = 1.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
};

/// Icosahedral subdivision with radial projection after each subdivision.
/// level 0 is the icosahedron; level k has 20*4^k triangles. Levels above 9
/// are rejected.
SurfaceMesh build_icosphere(const ModelParams& params, int level);

/// Maximum edge length.
double mesh_size(const SurfaceMesh& mesh);

/// Sum of triangle areas.
double total_area(const SurfaceMesh& mesh);

struct PointLocation {
  int triangle_index = -1;
  std::array<double, 3> barycentric{};
};

/// Locates the triangle hit by the ray {t X : t > 0} for X on the sphere.
/// Barycentric components are >= -1e-12; ties on edges resolve to the lowest
/// triangle index.
PointLocation locate_on_mesh(const SurfaceMesh& mesh, const Vec3& x);

/// Index of the mesh vertex closest to x (lowest index on ties).
int nearest_vertex(const SurfaceMesh& mesh, const Vec3& x);

/// Nodal interpolation I_h: coefficient i equals f(vertex i).
Eigen::VectorXd interpolate(const SurfaceMesh& mesh, const std::function<double(const Vec3&)>& f);

/// Componentwise nodal interpolation of a vector field; column i is the
/// value at vertex i.
Eigen::Matrix3Xd interpolate_field(const SurfaceMesh& mesh,
                                   const std::function<Vec3(const Vec3&)>& f);

/// Exports the mesh as ASCII OBJ.
void write_obj(const SurfaceMesh& mesh, const std::string& path);

struct VtkPointData {
  std::vector<std::pair<std::string, Eigen::VectorXd>> scalars;
  std::vector<std::pair<std::string, Eigen::Matrix3Xd>> vectors;
};

/// Exports the mesh (and optional nodal fields) as legacy ASCII VTK POLYDATA.
void write_vtk(const SurfaceMesh& mesh, const std::string& path,
               const VtkPointData& data = {});

/// Consistency check used by tests: closed orientable surface, Euler
/// characteristic 2, outward orientation, vertices on the sphere.
void validate_mesh(const SurfaceMesh& mesh);

}  // namespace membrane
