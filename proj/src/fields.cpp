#include "membrane/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace membrane {

namespace {

// f(x) = exp(-1/x) for x > 0, extended by 0; all derivatives vanish at 0.
double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double bump_derivative(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

void check_cutoff_params(double inner, double outer) {
  if (!(inner > 0.0) || !(outer > inner))
    throw std::invalid_argument("smooth_cutoff: need 0 < inner < outer");
}

}  // namespace

double smooth_cutoff(double s, double inner, double outer) {
  check_cutoff_params(inner, outer);
  const double a = std::abs(s);
  if (a <= inner) return 1.0;
  if (a >= outer) return 0.0;
  const double t = (a - inner) / (outer - inner);
  const double g = bump(1.0 - t), h = bump(t);
  return g / (g + h);
}

double smooth_cutoff_derivative(double s, double inner, double outer) {
  check_cutoff_params(inner, outer);
  const double a = std::abs(s);
  if (a <= inner || a >= outer) return 0.0;
  const double t = (a - inner) / (outer - inner);
  const double g = bump(1.0 - t), h = bump(t);
  const double gp = -bump_derivative(1.0 - t), hp = bump_derivative(t);
  const double deta_dt = (gp * h - g * hp) / ((g + h) * (g + h));
  return deta_dt / (outer - inner) * (s < 0.0 ? -1.0 : 1.0);
}

Vec3 rotation_field(const Vec3& centre, double r, double eps, const Vec3& x) {
  const double R = centre.norm();
  const Vec3 axis = centre / R;
  const double s = R - x.dot(axis);  // height deficit along the centre axis
  const double eta = smooth_cutoff(s, r, r + eps);
  if (eta == 0.0) return Vec3::Zero();
  return eta * axis.cross(x);
}

CurlField::CurlField(const std::vector<Particle>& particles, const Configuration& e, double delta,
                     const ModelParams& params) {
  params.validate();
  if (particles.size() != e.size())
    throw std::invalid_argument("CurlField: direction length mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("CurlField: delta must be > 0");
  delta_ = delta;
  radius_ = params.radius;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Vec3 omega = motion_angular_velocity(particles[i].centre, e[i]);
    for (const Vec3& site : particles[i].sites)
      terms_.push_back({site, site / radius_, omega});
  }
  // delta below the smallest site separation keeps the per-site stream
  // functions on disjoint balls and every site outside all other supports
  for (std::size_t i = 0; i < terms_.size(); ++i)
    for (std::size_t j = i + 1; j < terms_.size(); ++j)
      if ((terms_[i].site - terms_[j].site).norm() <= delta_)
        throw std::invalid_argument("CurlField: overlapping support balls, reduce delta");
}

Vec3 CurlField::operator()(const Vec3& y) const {
  // V = nu(y) x grad psi with the stream function
  //   psi(y) = eta(|site - y|) * [ |y|^2 (omega . n) - (y . omega)(y . n) ],
  // which is y . (omega x y x n) rearranged; the bracket is linear in omega.
  const double inner = delta_ / 4.0, outer = delta_ / 2.0;
  Vec3 v = Vec3::Zero();
  const Vec3 nu_y = y / radius_;
  for (const SiteTerm& term : terms_) {
    const Vec3 d = y - term.site;
    const double r = d.norm();
    if (r >= outer) continue;
    const double g =
        y.squaredNorm() * term.omega.dot(term.normal) - y.dot(term.omega) * y.dot(term.normal);
    const Vec3 grad_g = 2.0 * term.omega.dot(term.normal) * y - y.dot(term.normal) * term.omega -
                        y.dot(term.omega) * term.normal;
    Vec3 grad_psi = smooth_cutoff(r, inner, outer) * grad_g;
    if (r > inner) grad_psi += smooth_cutoff_derivative(r, inner, outer) * g / r * d;
    v += nu_y.cross(grad_psi);
  }
  return v;
}

Vec3 curl_field(const std::vector<Particle>& particles, const Configuration& p,
                const Configuration& e, double delta, const ModelParams& params, const Vec3& x) {
  const CurlField field(moved_particles(particles, p), e, delta, params);
  return field(x);
}

StrainTensor strain_tensor(const SurfaceMesh& mesh, const Eigen::Matrix3Xd& field_nodal,
                           int triangle_index) {
  if (field_nodal.cols() != mesh.num_vertices())
    throw std::invalid_argument("strain_tensor: field size mismatch");
  const auto g = detail::element_geometry(mesh, triangle_index);
  const auto& t = mesh.triangles[triangle_index];
  Mat3 jac = Mat3::Zero();  // jac(i, j) = D_j V_i, element constant
  for (int k = 0; k < 3; ++k) jac += field_nodal.col(t[k]) * g.grad[k].transpose();
  StrainTensor st;
  st.div = jac.trace();
  st.A = st.div * Mat3::Identity() - jac - jac.transpose();
  return st;
}

}  // namespace membrane
