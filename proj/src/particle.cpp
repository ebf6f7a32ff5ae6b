#include "membrane/particle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "membrane/geometry.hpp"

namespace membrane {

namespace {

// Rodrigues form used by both R_n and R_T: axis is a unit vector.
Vec3 rotate_about_axis(const Vec3& axis, double angle, const Vec3& x) {
  return (axis.dot(x)) * axis + std::cos(angle) * (axis.cross(x)).cross(axis) +
         std::sin(angle) * axis.cross(x);
}

}  // namespace

Vec3 rotate_about_normal(const Vec3& centre, double alpha, const Vec3& x) {
  return rotate_about_axis(centre.normalized(), alpha, x);
}

Vec3 translate_tangential(const Vec3& centre, const Vec3& tau, const Vec3& x) {
  const double len = tau.norm();
  if (len == 0.0) return x;
  const Vec3 axis = centre.normalized().cross(tau / len);
  return rotate_about_axis(axis, len, x);
}

Vec3 rigid_motion(const Vec3& centre, const MotionParam& p, const Vec3& x) {
  return translate_tangential(centre, p.tau, rotate_about_normal(centre, p.alpha, x));
}

Particle apply_motion(const Particle& particle, const MotionParam& p) {
  Particle out;
  out.points.reserve(particle.points.size());
  out.sites.reserve(particle.sites.size());
  out.heights = particle.heights;  // invariant under the lateral motion
  for (const Vec3& x : particle.points) out.points.push_back(rigid_motion(particle.centre, p, x));
  for (const Vec3& s : particle.sites) out.sites.push_back(rigid_motion(particle.centre, p, s));
  out.centre = rigid_motion(particle.centre, p, particle.centre);
  return out;
}

Vec3 motion_angular_velocity(const Vec3& centre, const MotionParam& e) {
  const Vec3 nu = centre.normalized();
  return e.alpha * nu + nu.cross(e.tau);
}

Vec3 motion_velocity(const Vec3& centre, const MotionParam& e, const Vec3& x) {
  return motion_angular_velocity(centre, e).cross(x);
}

bool check_feasible(const std::vector<Particle>& particles, const Configuration& p,
                    const ModelParams& params) {
  if (particles.size() != p.size())
    throw std::invalid_argument("check_feasible: configuration length mismatch");
  const double tol = 1e-8 * params.radius;
  const auto moved = moved_particles(particles, p);
  for (std::size_t i = 0; i < moved.size(); ++i)
    for (std::size_t j = i + 1; j < moved.size(); ++j)
      for (const Vec3& a : moved[i].sites)
        for (const Vec3& b : moved[j].sites)
          if ((a - b).norm() <= tol) return false;
  return true;
}

std::vector<Particle> moved_particles(const std::vector<Particle>& particles,
                                      const Configuration& p) {
  if (particles.size() != p.size())
    throw std::invalid_argument("moved_particles: configuration length mismatch");
  std::vector<Particle> out;
  out.reserve(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i)
    out.push_back(apply_motion(particles[i], p[i]));
  return out;
}

void collect_sites(const std::vector<Particle>& particles, std::vector<Vec3>& sites,
                   std::vector<double>& heights) {
  sites.clear();
  heights.clear();
  for (const Particle& part : particles) {
    sites.insert(sites.end(), part.sites.begin(), part.sites.end());
    heights.insert(heights.end(), part.heights.begin(), part.heights.end());
  }
}

double min_site_separation(const std::vector<Particle>& particles) {
  std::vector<Vec3> sites;
  std::vector<double> heights;
  collect_sites(particles, sites, heights);
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      sep = std::min(sep, (sites[i] - sites[j]).norm());
  return sep;
}

Particle Particle::from_points(const std::vector<Vec3>& points, const ModelParams& params,
                               std::optional<Vec3> centre,
                               const std::vector<std::optional<double>>& heights) {
  params.validate();
  if (points.empty()) throw std::invalid_argument("Particle: no attachment points");
  if (!heights.empty() && heights.size() != points.size())
    throw std::invalid_argument("Particle: heights list length mismatch");

  Particle part;
  part.points.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cp = closest_point(points[i], params);
    if (!heights.empty() && heights[i].has_value()) {
      // Explicit height: move the point radially onto the prescribed height.
      const double h = *heights[i];
      part.points.push_back((1.0 + h / params.radius) * cp.projection);
      part.sites.push_back(cp.projection);
      part.heights.push_back(h);
    } else {
      part.points.push_back(points[i]);
      part.sites.push_back(cp.projection);
      part.heights.push_back(cp.distance);
    }
  }
  for (std::size_t i = 0; i < part.points.size(); ++i)
    for (std::size_t j = i + 1; j < part.points.size(); ++j)
      if ((part.points[i] - part.points[j]).norm() == 0.0)
        throw std::invalid_argument("Particle: attachment points must be pairwise distinct");

  if (centre.has_value()) {
    part.centre = closest_point(*centre, params).projection;
  } else {
    Vec3 mean = Vec3::Zero();
    for (const Vec3& x : part.points) mean += x;
    mean /= static_cast<double>(part.points.size());
    if (mean.norm() == 0.0)
      throw std::invalid_argument("Particle: mean of points at origin, supply a centre");
    part.centre = closest_point(mean, params).projection;
  }
  return part;
}

Particle Particle::from_sites(const std::vector<Vec3>& sites, const std::vector<double>& heights,
                              const ModelParams& params, std::optional<Vec3> centre) {
  if (sites.size() != heights.size())
    throw std::invalid_argument("Particle: sites/heights length mismatch");
  std::vector<Vec3> points;
  std::vector<std::optional<double>> hs;
  points.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    points.push_back(sites[i]);
    hs.emplace_back(heights[i]);
  }
  return from_points(points, params, centre, hs);
}

std::vector<Particle> load_particle_file(const std::string& path, const ModelParams& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open particle file: " + path);

  struct Raw {
    std::optional<Vec3> centre;
    std::vector<Vec3> points;
    std::vector<std::optional<double>> heights;
  };
  std::vector<Raw> raw;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (key == "particle") {
      raw.emplace_back();
    } else if (key == "centre" || key == "center") {
      if (raw.empty()) throw std::runtime_error(where + ": 'centre' before 'particle'");
      Vec3 c;
      if (!(ss >> c.x() >> c.y() >> c.z())) throw std::runtime_error(where + ": bad centre");
      raw.back().centre = c;
    } else if (key == "point") {
      if (raw.empty()) throw std::runtime_error(where + ": 'point' before 'particle'");
      Vec3 x;
      if (!(ss >> x.x() >> x.y() >> x.z())) throw std::runtime_error(where + ": bad point");
      raw.back().points.push_back(x);
      std::string opt;
      if (ss >> opt) {
        if (opt != "height") throw std::runtime_error(where + ": expected 'height'");
        double h;
        if (!(ss >> h)) throw std::runtime_error(where + ": bad height");
        raw.back().heights.emplace_back(h);
      } else {
        raw.back().heights.emplace_back(std::nullopt);
      }
    } else {
      throw std::runtime_error(where + ": unknown keyword '" + key + "'");
    }
  }

  std::vector<Particle> particles;
  particles.reserve(raw.size());
  for (const Raw& r : raw)
    particles.push_back(Particle::from_points(r.points, params, r.centre, r.heights));
  if (particles.empty()) throw std::runtime_error(path + ": no particles defined");
  return particles;
}

}  // namespace membrane
