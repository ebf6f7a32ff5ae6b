#include "membrane/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace membrane {

namespace {

// cos/sin of 36 and 72 degrees; mirrored vertices share these constants so
// the y -> -y reflection symmetry is exact in floating point.
constexpr double kCos72 = 0.30901699437494742;
constexpr double kSin72 = 0.95105651629515353;
constexpr double kCos36 = 0.80901699437494745;
constexpr double kSin36 = 0.58778525229247313;

SurfaceMesh base_icosahedron(double R) {
  const double z = 1.0 / std::sqrt(5.0);   // ring height
  const double r = 2.0 / std::sqrt(5.0);   // ring radius
  SurfaceMesh mesh;
  mesh.radius = R;
  auto add = [&](double x, double y, double zz) { mesh.vertices.push_back(R * Vec3(x, y, zz)); };
  add(0, 0, 1);                                   // 0: north pole
  add(r, 0, z);                                   // 1: upper ring, longitude 0
  add(r * kCos72, r * kSin72, z);                 // 2: 72
  add(-r * kCos36, r * kSin36, z);                // 3: 144
  add(-r * kCos36, -r * kSin36, z);               // 4: -144
  add(r * kCos72, -r * kSin72, z);                // 5: -72
  add(r * kCos36, r * kSin36, -z);                // 6: lower ring, longitude 36
  add(-r * kCos72, r * kSin72, -z);               // 7: 108
  add(-r, 0, -z);                                 // 8: 180
  add(-r * kCos72, -r * kSin72, -z);              // 9: -108
  add(r * kCos36, -r * kSin36, -z);               // 10: -36
  add(0, 0, -1);                                  // 11: south pole

  const int N = 0, S = 11;
  const int U[5] = {1, 2, 3, 4, 5};
  const int L[5] = {6, 7, 8, 9, 10};
  for (int k = 0; k < 5; ++k) {
    const int k1 = (k + 1) % 5;
    mesh.triangles.push_back({N, U[k], U[k1]});
    mesh.triangles.push_back({U[k], L[k], U[k1]});
    mesh.triangles.push_back({L[k], L[k1], U[k1]});
    mesh.triangles.push_back({S, L[k1], L[k]});
  }
  return mesh;
}

void subdivide(SurfaceMesh& mesh) {
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec3 m = mesh.vertices[key.first] + mesh.vertices[key.second];
    m *= mesh.radius / m.norm();
    const int idx = mesh.num_vertices();
    mesh.vertices.push_back(m);
    midpoint.emplace(key, idx);
    return idx;
  };

  std::vector<std::array<int, 3>> fine;
  fine.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    fine.push_back({t[0], ab, ca});
    fine.push_back({t[1], bc, ab});
    fine.push_back({t[2], ca, bc});
    fine.push_back({ab, bc, ca});
  }
  mesh.triangles = std::move(fine);
}

}  // namespace

SurfaceMesh build_icosphere(const ModelParams& params, int level) {
  params.validate();
  if (level < 0) throw std::invalid_argument("build_icosphere: level must be >= 0");
  if (level > 9) throw std::invalid_argument("build_icosphere: level > 9 rejected (memory guard)");
  SurfaceMesh mesh = base_icosahedron(params.radius);
  for (int l = 0; l < level; ++l) subdivide(mesh);
  mesh.refinement_level = level;
  return mesh;
}

double mesh_size(const SurfaceMesh& mesh) {
  if (mesh.triangles.empty()) throw std::invalid_argument("mesh_size: empty mesh");
  double h = 0.0;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e)
      h = std::max(h, (mesh.vertices[t[e]] - mesh.vertices[t[(e + 1) % 3]]).norm());
  return h;
}

double total_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3 u = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec3 v = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    area += 0.5 * u.cross(v).norm();
  }
  return area;
}

PointLocation locate_on_mesh(const SurfaceMesh& mesh, const Vec3& x) {
  constexpr double kBaryTol = -1e-12;
  for (int ti = 0; ti < mesh.num_triangles(); ++ti) {
    const auto& t = mesh.triangles[ti];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    // Solve [a b c] gamma = x by Cramer; the ray t x hits this triangle iff
    // sum(gamma) > 0 and gamma/sum(gamma) is admissible barycentric.
    const double det = a.cross(b).dot(c);
    if (det == 0.0) continue;
    const double g0 = x.cross(b).dot(c) / det;
    const double g1 = a.cross(x).dot(c) / det;
    const double g2 = a.cross(b).dot(x) / det;
    const double sum = g0 + g1 + g2;
    if (sum <= 0.0) continue;
    const double b0 = g0 / sum, b1 = g1 / sum, b2 = g2 / sum;
    if (b0 >= kBaryTol && b1 >= kBaryTol && b2 >= kBaryTol)
      return PointLocation{ti, {b0, b1, b2}};
  }
  throw std::runtime_error("locate_on_mesh: no containing triangle (internal error)");
}

int nearest_vertex(const SurfaceMesh& mesh, const Vec3& x) {
  int best = 0;
  double dist = (mesh.vertices[0] - x).squaredNorm();
  for (int i = 1; i < mesh.num_vertices(); ++i) {
    const double d = (mesh.vertices[i] - x).squaredNorm();
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return best;
}

Eigen::VectorXd interpolate(const SurfaceMesh& mesh, const std::function<double(const Vec3&)>& f) {
  Eigen::VectorXd coeff(mesh.num_vertices());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < mesh.num_vertices(); ++i) coeff[i] = f(mesh.vertices[i]);
  return coeff;
}

Eigen::Matrix3Xd interpolate_field(const SurfaceMesh& mesh,
                                   const std::function<Vec3(const Vec3&)>& f) {
  Eigen::Matrix3Xd coeff(3, mesh.num_vertices());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < mesh.num_vertices(); ++i) coeff.col(i) = f(mesh.vertices[i]);
  return coeff;
}

void write_obj(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_vtk(const SurfaceMesh& mesh, const std::string& path, const VtkPointData& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[160];
  out << "# vtk DataFile Version 3.0\nmembrane surface\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  out << "POLYGONS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (data.scalars.empty() && data.vectors.empty()) return;
  out << "POINT_DATA " << mesh.num_vertices() << '\n';
  for (const auto& [name, values] : data.scalars) {
    if (values.size() != mesh.num_vertices())
      throw std::invalid_argument("write_vtk: scalar field size mismatch for " + name);
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", values[i]);
      out << buf;
    }
  }
  for (const auto& [name, values] : data.vectors) {
    if (values.cols() != mesh.num_vertices())
      throw std::invalid_argument("write_vtk: vector field size mismatch for " + name);
    out << "VECTORS " << name << " double\n";
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", values(0, i), values(1, i),
                    values(2, i));
      out << buf;
    }
  }
}

void validate_mesh(const SurfaceMesh& mesh) {
  const double R = mesh.radius;
  for (const Vec3& v : mesh.vertices)
    if (std::abs(v.norm() - R) > 1e-12 * R)
      throw std::runtime_error("validate_mesh: vertex off the sphere");

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      auto key = std::minmax(t[e], t[(e + 1) % 3]);
      ++edge_count[key];
    }
  for (const auto& [edge, count] : edge_count)
    if (count != 2) throw std::runtime_error("validate_mesh: edge not shared by 2 triangles");

  const long V = mesh.num_vertices();
  const long E = static_cast<long>(edge_count.size());
  const long F = mesh.num_triangles();
  if (V - E + F != 2) throw std::runtime_error("validate_mesh: Euler characteristic != 2");

  for (const auto& t : mesh.triangles) {
    const Vec3 u = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec3 v = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    const Vec3 centroid = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    if (u.cross(v).dot(centroid) <= 0.0)
      throw std::runtime_error("validate_mesh: inward-oriented triangle");
  }
}

}  // namespace membrane
