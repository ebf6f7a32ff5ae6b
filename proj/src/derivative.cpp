#include "membrane/derivative.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace membrane {

namespace {

Configuration combine(const Configuration& p, const Configuration& e, double s) {
  Configuration out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i].alpha = p[i].alpha + s * e[i].alpha;
    out[i].tau = p[i].tau + s * e[i].tau;
  }
  return out;
}

double functional_element(const SurfaceMesh& mesh, const ModelParams& params,
                          const MembraneSolution& sol, const Eigen::Matrix3Xd& field, int ti) {
  const auto& t = mesh.triangles[ti];
  if (field.col(t[0]).isZero(0.0) && field.col(t[1]).isZero(0.0) && field.col(t[2]).isZero(0.0))
    return 0.0;
  const auto g = detail::element_geometry(mesh, ti);
  const StrainTensor st = strain_tensor(mesh, field, ti);

  Vec3 du, uu;
  Vec3 grad_u = Vec3::Zero(), grad_d = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    uu[k] = sol.u[t[k]];
    du[k] = uu[k] - sol.w[t[k]];
    grad_u += uu[k] * g.grad[k];
    grad_d += du[k] * g.grad[k];
  }
  auto quad = [&](const Vec3& f) {
    return g.area / 12.0 *
           (2.0 * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) +
            2.0 * (f[0] * f[1] + f[1] * f[2] + f[0] * f[2]));
  };

  const double kappa = params.kappa, sigma = params.sigma, R = params.radius;
  double value = -kappa * (0.5 * st.div * quad(du) + grad_d.dot(st.A * grad_u) * g.area);
  value += 0.5 * (sigma - 2.0 * kappa / (R * R)) * grad_u.dot(st.A * grad_u) * g.area;
  value -= sigma / (R * R) * st.div * quad(uu);
  return value;
}

}  // namespace

MembraneSolution solve_configuration(const SurfaceMesh& mesh, const ModelParams& params,
                                     const std::vector<Particle>& particles,
                                     const Configuration& p, double beta,
                                     std::vector<Particle>* moved, const Operators* ops) {
  if (!check_feasible(particles, p, params))
    throw std::invalid_argument("solve_configuration: infeasible configuration");
  auto moved_local = moved_particles(particles, p);
  std::vector<Vec3> sites;
  std::vector<double> heights;
  collect_sites(moved_local, sites, heights);
  if (moved) *moved = std::move(moved_local);
  return solve_membrane(mesh, params, sites, heights, beta, ops);
}

double config_energy(const SurfaceMesh& mesh, const ModelParams& params,
                     const std::vector<Particle>& particles, const Configuration& p, double beta,
                     const Operators* ops) {
  return solve_configuration(mesh, params, particles, p, beta, nullptr, ops).energy;
}

double derivative_functional(const SurfaceMesh& mesh, const ModelParams& params,
                             const MembraneSolution& solution,
                             const Eigen::Matrix3Xd& field_nodal) {
  params.validate();
  if (solution.u.size() != mesh.num_vertices() || field_nodal.cols() != mesh.num_vertices())
    throw std::invalid_argument("derivative_functional: size mismatch");
  const int nt = mesh.num_triangles();
  std::vector<double> contrib(nt);
#pragma omp parallel for schedule(static)
  for (int ti = 0; ti < nt; ++ti)
    contrib[ti] = functional_element(mesh, params, solution, field_nodal, ti);
  double value = 0.0;
  for (int ti = 0; ti < nt; ++ti) value += contrib[ti];
  return value;
}

double derivative_functional_reference(const SurfaceMesh& mesh, const ModelParams& params,
                                       const MembraneSolution& solution,
                                       const Eigen::Matrix3Xd& field_nodal) {
  params.validate();
  double value = 0.0;
  for (int ti = 0; ti < mesh.num_triangles(); ++ti)
    value += functional_element(mesh, params, solution, field_nodal, ti);
  return value;
}

double difference_quotient(const SurfaceMesh& mesh, const ModelParams& params,
                           const std::vector<Particle>& particles, const Configuration& p,
                           const Configuration& e, double step, double beta,
                           const Operators* ops) {
  if (!(step > 0.0)) throw std::invalid_argument("difference_quotient: step must be > 0");
  const double ep = config_energy(mesh, params, particles, combine(p, e, step), beta, ops);
  const double em = config_energy(mesh, params, particles, combine(p, e, -step), beta, ops);
  return (ep - em) / (2.0 * step);
}

double default_curl_delta(const SurfaceMesh& mesh, const std::vector<Particle>& particles) {
  const double h = mesh_size(mesh);
  const double sep = min_site_separation(particles);
  return std::min(3.0 * h, 0.5 * sep);
}

double config_derivative(const SurfaceMesh& mesh, const ModelParams& params,
                         const std::vector<Particle>& particles, const Configuration& p,
                         const Configuration& e, double beta, const MembraneSolution* solution,
                         double delta, const Operators* ops) {
  std::vector<Particle> moved;
  MembraneSolution local;
  if (!solution) {
    local = solve_configuration(mesh, params, particles, p, beta, &moved, ops);
    solution = &local;
  } else {
    moved = moved_particles(particles, p);
  }
  if (delta <= 0.0) delta = default_curl_delta(mesh, moved);
  const CurlField field(moved, e, delta, params);
  const Eigen::Matrix3Xd nodal =
      interpolate_field(mesh, [&field](const Vec3& x) { return field(x); });
  return derivative_functional(mesh, params, *solution, nodal);
}

std::pair<Vec3, Vec3> tangent_basis(const Vec3& centre) {
  const Vec3 nu = centre.normalized();
  const Mat3 P = Mat3::Identity() - nu * nu.transpose();
  Vec3 proj[3];
  double norms[3];
  for (int i = 0; i < 3; ++i) {
    proj[i] = P.col(i);
    norms[i] = proj[i].norm();
  }
  int first = 0;
  for (int i = 1; i < 3; ++i)
    if (norms[i] > norms[first]) first = i;
  const Vec3 t1 = proj[first] / norms[first];
  int second = -1;
  double best = -1.0;
  for (int i = 0; i < 3; ++i) {
    if (i == first) continue;
    const double res = (proj[i] - proj[i].dot(t1) * t1).norm();
    if (res > best) {
      best = res;
      second = i;
    }
  }
  const Vec3 t2 = (proj[second] - proj[second].dot(t1) * t1).normalized();
  return {t1, t2};
}

std::vector<ParticleGradient> config_gradient(const SurfaceMesh& mesh, const ModelParams& params,
                                              const std::vector<Particle>& particles,
                                              const Configuration& p, double beta, double delta,
                                              const Operators* ops) {
  std::vector<Particle> moved;
  const MembraneSolution sol = solve_configuration(mesh, params, particles, p, beta, &moved, ops);
  if (delta <= 0.0) delta = default_curl_delta(mesh, moved);

  std::vector<ParticleGradient> grad(moved.size());
  for (std::size_t i = 0; i < moved.size(); ++i) {
    auto [t1, t2] = tangent_basis(moved[i].centre);
    grad[i].tangent1 = t1;
    grad[i].tangent2 = t2;
    Configuration e(moved.size());
    auto evaluate = [&](const MotionParam& dir) {
      e[i] = dir;
      const CurlField field(moved, e, delta, params);
      const Eigen::Matrix3Xd nodal =
          interpolate_field(mesh, [&field](const Vec3& x) { return field(x); });
      e[i] = MotionParam{};
      return derivative_functional(mesh, params, sol, nodal);
    };
    grad[i].d_alpha = evaluate({1.0, Vec3::Zero()});
    grad[i].d_tangent1 = evaluate({0.0, t1});
    grad[i].d_tangent2 = evaluate({0.0, t2});
  }
  return grad;
}

}  // namespace membrane
