#include "membrane/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "membrane/report.hpp"

namespace membrane {

namespace {

namespace fs = std::filesystem;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void apply_threads(const ExperimentConfig& config) {
#ifdef _OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
#else
  (void)config;
#endif
}

std::string out_path(const ExperimentConfig& config, const std::string& name) {
  fs::create_directories(config.output_dir);
  return (fs::path(config.output_dir) / name).string();
}

void manifest_basics(RunManifest& manifest, const ExperimentConfig& config) {
  manifest.set("kappa", config.params.kappa);
  manifest.set("sigma", config.params.sigma);
  manifest.set("radius", config.params.radius);
  manifest.set("beta", config.beta_value());
#ifdef _OPENMP
  manifest.set("threads", static_cast<long long>(omp_get_max_threads()));
#else
  manifest.set("threads", static_cast<long long>(1));
#endif
}

Configuration zero_config(std::size_t n) { return Configuration(n); }

// Aitken extrapolation of the tail of a convergent sequence.
double extrapolate(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 3) return values.back();
  const double f1 = values[n - 3], f2 = values[n - 2], f3 = values[n - 1];
  const double d2 = (f3 - f2) - (f2 - f1);
  if (std::abs(d2) < 1e-300 || std::abs(f3 - f2) >= std::abs(f2 - f1)) return f3;
  return f3 - (f3 - f2) * (f3 - f2) / d2;
}

int count_sign_changes(const std::vector<double>& values) {
  int changes = 0;
  double prev = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = values[i] - values[i - 1];
    if (d == 0.0) continue;
    if (prev != 0.0 && ((d > 0.0) != (prev > 0.0))) ++changes;
    prev = d;
  }
  return changes;
}

}  // namespace

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto need = [&](auto& target) {
      if (!(ss >> target)) throw std::runtime_error(where + ": bad value for " + key);
    };
    if (key == "kappa") need(config.params.kappa);
    else if (key == "sigma") need(config.params.sigma);
    else if (key == "radius") need(config.params.radius);
    else if (key == "level") need(config.level);
    else if (key == "level_min") need(config.level_min);
    else if (key == "level_max") need(config.level_max);
    else if (key == "beta") need(config.beta);
    else if (key == "delta") need(config.delta);
    else if (key == "sweep_points") need(config.sweep_points);
    else if (key == "offgrid_points") need(config.offgrid_points);
    else if (key == "rotation_points") need(config.rotation_points);
    else if (key == "output_dir") need(config.output_dir);
    else if (key == "threads") need(config.threads);
    else if (key == "with_null_and_rotation") need(config.with_null_and_rotation);
    else throw std::runtime_error(where + ": unknown key '" + key + "'");
  }
  config.params.validate();
  return config;
}

double sweep_angle(double t) { return std::asin(t / std::sqrt(t * t + (t - 1.0) * (t - 1.0))); }

std::vector<Particle> convergence_particles(const ModelParams& params) {
  const double R = params.radius;
  const std::vector<Vec3> sites = {R * Vec3(0, 0, 1),  R * Vec3(0, 0, -1), R * Vec3(0, 1, 0),
                                   R * Vec3(0, -1, 0), R * Vec3(1, 0, 0),  R * Vec3(-1, 0, 0)};
  const std::vector<double> heights = {1.0, 0.0, 0.0, 0.0, 0.1, 0.0};
  std::vector<Particle> particles;
  for (std::size_t i = 0; i < sites.size(); ++i)
    particles.push_back(Particle::from_sites({sites[i]}, {heights[i]}, params, sites[i]));
  return particles;
}

std::vector<Particle> sweep_particles(const ModelParams& params, double polar_angle) {
  const double R = params.radius;
  const Vec3 moving = R * Vec3(std::sin(polar_angle), 0.0, std::cos(polar_angle));
  std::vector<Particle> particles;
  particles.push_back(Particle::from_sites({moving}, {0.1}, params, moving));
  const std::vector<Vec3> fixed = {R * Vec3(0, 0, -1), R * Vec3(0, 1, 0), R * Vec3(0, -1, 0),
                                   R * Vec3(-1, 0, 0)};
  for (const Vec3& s : fixed) particles.push_back(Particle::from_sites({s}, {0.0}, params, s));
  return particles;
}

namespace {

// Eight attachment sites near the north pole used by the two-particle
// experiments: (+-a, 0, .), (+-a/2, +-a/2, .), (0, +-a/4, .).
std::vector<Vec3> eight_point_sites(double a) {
  const double b = 0.5 * a, c = 0.25 * a;
  auto lift = [](double x, double y) { return Vec3(x, y, std::sqrt(1.0 - x * x - y * y)); };
  return {lift(a, 0.0),  lift(-a, 0.0), lift(b, b),   lift(-b, b),
          lift(b, -b),   lift(-b, -b),  lift(0.0, c), lift(0.0, -c)};
}

// x -> (x1, -x3, x2): maps the polar particle to the equator at (0,-1,0).
Vec3 equator_map(const Vec3& y) { return Vec3(y.x(), -y.z(), y.y()); }

Particle make_eight_point(const ModelParams& params, const std::vector<Vec3>& sites,
                          double z_coeff, const Vec3& centre) {
  std::vector<double> heights;
  heights.reserve(sites.size());
  for (const Vec3& s : sites) heights.push_back(1.0 - z_coeff * s.x() * s.x());
  std::vector<Vec3> scaled;
  scaled.reserve(sites.size());
  for (const Vec3& s : sites) scaled.push_back(params.radius * s);
  return Particle::from_sites(scaled, heights, params, params.radius * centre);
}

}  // namespace

std::vector<Particle> two_particle_set(const ModelParams& params, double spread,
                                       double z_coeff_first, double z_coeff_second) {
  const auto base = eight_point_sites(spread);
  std::vector<Vec3> mirrored;
  mirrored.reserve(base.size());
  for (const Vec3& s : base) mirrored.push_back(equator_map(s));
  return {make_eight_point(params, base, z_coeff_first, Vec3(0, 0, 1)),
          make_eight_point(params, mirrored, z_coeff_second, equator_map(Vec3(0, 0, 1)))};
}

std::vector<Particle> single_particle_set(const ModelParams& params, double spread,
                                          double z_coeff) {
  return {make_eight_point(params, eight_point_sites(spread), z_coeff, Vec3(0, 0, 1))};
}

std::vector<std::pair<double, int>> meridian_vertices(const SurfaceMesh& mesh) {
  const double tol = 1e-12 * mesh.radius;
  std::vector<std::pair<double, int>> ladder;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& v = mesh.vertices[i];
    if (std::abs(v.y()) <= tol) ladder.emplace_back(std::atan2(v.x(), v.z()), i);
  }
  std::sort(ladder.begin(), ladder.end());
  return ladder;
}

double three_point_derivative(double f_minus, double f_zero, double f_plus, double b, double a) {
  return (b * b * f_plus - a * a * f_minus - (b * b - a * a) * f_zero) / (a * b * (a + b));
}

ConvergenceResult run_convergence(const ExperimentConfig& config) {
  apply_threads(config);
  if (config.level_max - config.level_min < 2)
    throw std::invalid_argument("run_convergence: need a level range of length >= 3");
  const double beta = config.beta_value();
  RunManifest manifest("convergence");
  manifest_basics(manifest, config);

  ConvergenceResult result;
  std::vector<double> deltas_used;
  CsvWriter table({"level", "h", "step_plus", "step_minus", "energy_minus", "energy_zero",
                   "energy_plus", "formula", "dq", "delta"});
  Stopwatch total;
  for (int level = config.level_min; level <= config.level_max; ++level) {
    Stopwatch watch;
    const SurfaceMesh mesh = build_icosphere(config.params, level);
    const Operators ops = assemble(mesh);
    const auto particles = convergence_particles(config.params);
    const Configuration p0 = zero_config(particles.size());

    std::vector<Particle> moved;
    const MembraneSolution sol =
        solve_configuration(mesh, config.params, particles, p0, beta, &moved, &ops);
    // a level-independent support keeps the interpolated field converging to
    // one fixed V across the ladder; 3h-type supports add low-order noise to
    // the observed convergence rates
    const double delta = config.delta > 0.0
                             ? config.delta
                             : std::min(0.25 * config.params.radius,
                                        0.499 * min_site_separation(moved));

    Configuration e = zero_config(particles.size());
    e[0].tau = Vec3(1, 0, 0);
    const double formula =
        config_derivative(mesh, config.params, particles, p0, e, beta, &sol, delta, &ops);

    // one-lattice-increment DQ offsets: nearest meridian vertices to the pole
    const auto ladder = meridian_vertices(mesh);
    double s_plus = 0.0, s_minus = 0.0;
    for (const auto& [phi, idx] : ladder) {
      if (phi > 1e-9 && (s_plus == 0.0 || phi < s_plus)) s_plus = phi;
      if (phi < -1e-9 && (s_minus == 0.0 || -phi < s_minus)) s_minus = -phi;
    }
    Configuration pp = p0, pm = p0;
    pp[0].tau = s_plus * Vec3(1, 0, 0);
    pm[0].tau = -s_minus * Vec3(1, 0, 0);
    const double e_plus = config_energy(mesh, config.params, particles, pp, beta, &ops);
    const double e_minus = config_energy(mesh, config.params, particles, pm, beta, &ops);
    const double dq = three_point_derivative(e_minus, sol.energy, e_plus, s_minus, s_plus);

    ConvergenceRow row{level,  mesh_size(mesh), s_plus, s_minus, e_minus,
                       sol.energy, e_plus,     formula, dq,      delta};
    result.rows.push_back(row);
    deltas_used.push_back(delta);
    table.row({static_cast<long long>(level), row.h, s_plus, s_minus, e_minus, sol.energy, e_plus,
               formula, dq, delta});
    manifest.add_timing("level_" + std::to_string(level), watch.ms());
  }

  std::vector<double> formulas, dqs;
  for (const auto& row : result.rows) {
    formulas.push_back(row.formula);
    dqs.push_back(row.dq);
  }
  result.formula_limit = extrapolate(formulas);
  result.dq_limit = extrapolate(dqs);

  // errors against the finest level, EOC between consecutive levels
  CsvWriter eoc_table({"level", "h", "err_formula", "err_dq", "eoc_formula", "eoc_dq"});
  const std::size_t last = result.rows.size() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    result.err_formula.push_back(std::abs(result.rows[i].formula - result.rows[last].formula));
    result.err_dq.push_back(std::abs(result.rows[i].dq - result.rows[last].dq));
  }
  for (std::size_t i = 0; i + 1 < result.err_formula.size(); ++i) {
    const double hr = result.rows[i].h / result.rows[i + 1].h;
    result.eoc_formula.push_back(std::log(result.err_formula[i] / result.err_formula[i + 1]) /
                                 std::log(hr));
    result.eoc_dq.push_back(std::log(result.err_dq[i] / result.err_dq[i + 1]) / std::log(hr));
  }
  for (std::size_t i = 0; i < result.err_formula.size(); ++i) {
    eoc_table.row({static_cast<long long>(result.rows[i].level), result.rows[i].h,
                   result.err_formula[i], result.err_dq[i],
                   i > 0 ? CsvWriter::Cell(result.eoc_formula[i - 1]) : CsvWriter::Cell("--"),
                   i > 0 ? CsvWriter::Cell(result.eoc_dq[i - 1]) : CsvWriter::Cell("--")});
  }

  const std::string table_path = out_path(config, "convergence.csv");
  const std::string eoc_path = out_path(config, "convergence_eoc.csv");
  table.save(table_path);
  eoc_table.save(eoc_path);
  manifest.add_file(table_path);
  manifest.add_file(eoc_path);
  manifest.set("formula_limit", result.formula_limit);
  manifest.set("dq_limit", result.dq_limit);
  manifest.set("level_min", static_cast<long long>(config.level_min));
  manifest.set("level_max", static_cast<long long>(config.level_max));
  manifest.set_array("delta_per_level", deltas_used);
  manifest.add_timing("total", total.ms());
  manifest.save(out_path(config, "convergence_manifest.json"));
  return result;
}

SweepResult run_sweep(const ExperimentConfig& config, bool aligned) {
  apply_threads(config);
  const double beta = config.beta_value();
  RunManifest manifest(aligned ? "sweep-aligned" : "sweep-offgrid");
  manifest_basics(manifest, config);
  Stopwatch total;

  const SurfaceMesh mesh = build_icosphere(config.params, config.level);
  const Operators ops = assemble(mesh);

  SweepResult result;
  result.level = config.level;
  result.h = mesh_size(mesh);

  // targets t = m/(N-1) with polar angles theta(t); aligned mode snaps the
  // moving site to the nearest meridian vertex
  std::vector<std::pair<double, double>> stations;  // (t, polar angle)
  const int n_points = aligned ? config.sweep_points : config.offgrid_points;
  if (n_points < 5) throw std::invalid_argument("run_sweep: too few sweep points");
  if (aligned) {
    const auto ladder = meridian_vertices(mesh);
    double prev = -1.0;
    for (int m = 0; m < n_points; ++m) {
      const double t = static_cast<double>(m) / (n_points - 1);
      const double target = sweep_angle(t);
      double best = 0.0, dist = 1e30;
      for (const auto& [phi, idx] : ladder)
        if (std::abs(phi - target) < dist) {
          dist = std::abs(phi - target);
          best = phi;
        }
      if (best > prev) {  // drop duplicate snaps
        stations.emplace_back(t, best);
        prev = best;
      }
    }
  } else {
    for (int m = 0; m < n_points; ++m) {
      const double t = static_cast<double>(m) / (n_points - 1);
      stations.emplace_back(t, sweep_angle(t));
    }
  }

  std::vector<double> energies(stations.size());
  std::vector<double> formulas(stations.size());
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const double angle = stations[i].second;
    const auto particles = sweep_particles(config.params, angle);
    const Configuration p0 = zero_config(particles.size());
    std::vector<Particle> moved;
    const MembraneSolution sol =
        solve_configuration(mesh, config.params, particles, p0, beta, &moved, &ops);
    const double delta = config.delta > 0.0 ? config.delta : default_curl_delta(mesh, moved);
    Configuration e = zero_config(particles.size());
    e[0].tau = Vec3(std::cos(angle), 0.0, -std::sin(angle));  // meridian tangent
    energies[i] = sol.energy;
    formulas[i] =
        config_derivative(mesh, config.params, particles, p0, e, beta, &sol, delta, &ops);
  }

  CsvWriter table({"t", "angle", "h", "level", "energy", "formula", "dq", "abs_gap", "rel_gap"});
  std::vector<double> dq_values(stations.size(), 0.0);
  for (std::size_t i = 0; i < stations.size(); ++i) {
    SweepPoint point;
    point.t = stations[i].first;
    point.angle = stations[i].second;
    point.energy = energies[i];
    point.formula = formulas[i];
    if (i > 0 && i + 1 < stations.size()) {
      const double a = stations[i + 1].second - stations[i].second;
      const double b = stations[i].second - stations[i - 1].second;
      point.dq = three_point_derivative(energies[i - 1], energies[i], energies[i + 1], b, a);
      point.gap = std::abs(point.formula - *point.dq);
      dq_values[i] = *point.dq;
      result.dq_scale = std::max(result.dq_scale, std::abs(*point.dq));
    }
    result.points.push_back(point);
  }
  for (std::size_t i = 1; i + 1 < result.points.size(); ++i)
    result.max_interior_rel_gap =
        std::max(result.max_interior_rel_gap, *result.points[i].gap / result.dq_scale);
  result.energy_sign_changes = count_sign_changes(energies);

  for (const auto& point : result.points) {
    table.row({point.t, point.angle, result.h, static_cast<long long>(result.level), point.energy,
               point.formula, point.dq ? CsvWriter::Cell(*point.dq) : CsvWriter::Cell("--"),
               point.gap ? CsvWriter::Cell(*point.gap) : CsvWriter::Cell("--"),
               point.gap ? CsvWriter::Cell(*point.gap / result.dq_scale) : CsvWriter::Cell("--")});
  }
  const std::string table_path =
      out_path(config, aligned ? "sweep_aligned.csv" : "sweep_offgrid.csv");
  table.save(table_path);
  manifest.add_file(table_path);
  manifest.set("level", static_cast<long long>(config.level));
  manifest.set("h", result.h);
  manifest.set("stations", static_cast<long long>(stations.size()));
  manifest.set("max_interior_rel_gap", result.max_interior_rel_gap);
  manifest.set("dq_scale", result.dq_scale);
  manifest.set("delta",
               config.delta > 0.0 ? config.delta : 0.0);  // per-station defaults otherwise
  manifest.add_timing("total", total.ms());
  manifest.save(out_path(config, aligned ? "sweep_aligned_manifest.json"
                                         : "sweep_offgrid_manifest.json"));
  return result;
}

namespace {

RotationSweepResult rotation_sweep_impl(const ExperimentConfig& config,
                                        const std::vector<Particle>& particles,
                                        const std::string& name) {
  const double beta = config.beta_value();
  RunManifest manifest(name);
  manifest_basics(manifest, config);
  Stopwatch total;

  const SurfaceMesh mesh = build_icosphere(config.params, config.level);
  const Operators ops = assemble(mesh);

  RotationSweepResult result;
  result.level = config.level;
  result.h = mesh_size(mesh);

  const int n_points = config.rotation_points;
  if (n_points < 3) throw std::invalid_argument("rotation sweep: too few points");
  std::vector<double> alphas(n_points), energies(n_points), formulas(n_points);
  for (int m = 0; m < n_points; ++m) {
    const double t = 2.0 * static_cast<double>(m) / (n_points - 1);
    alphas[m] = 0.5 * std::numbers::pi * t;
    Configuration p = zero_config(particles.size());
    p[0].alpha = alphas[m];
    std::vector<Particle> moved;
    const MembraneSolution sol =
        solve_configuration(mesh, config.params, particles, p, beta, &moved, &ops);
    const double delta = config.delta > 0.0 ? config.delta : default_curl_delta(mesh, moved);
    Configuration e = zero_config(particles.size());
    e[0].alpha = 1.0;
    energies[m] = sol.energy;
    formulas[m] =
        config_derivative(mesh, config.params, particles, p, e, beta, &sol, delta, &ops);
    result.max_abs_formula = std::max(result.max_abs_formula, std::abs(formulas[m]));
  }

  CsvWriter table({"t", "alpha", "h", "level", "energy", "formula", "dq", "abs_gap", "rel_gap"});
  double dq_scale = 0.0;
  std::vector<std::optional<double>> dqs(n_points);
  for (int m = 1; m + 1 < n_points; ++m) {
    dqs[m] = (energies[m + 1] - energies[m - 1]) / (alphas[m + 1] - alphas[m - 1]);
    dq_scale = std::max(dq_scale, std::abs(*dqs[m]));
  }
  for (int m = 0; m < n_points; ++m) {
    SweepPoint point;
    point.t = 2.0 * static_cast<double>(m) / (n_points - 1);
    point.angle = alphas[m];
    point.energy = energies[m];
    point.formula = formulas[m];
    point.dq = dqs[m];
    if (dqs[m]) point.gap = std::abs(formulas[m] - *dqs[m]);
    result.points.push_back(point);
    table.row({point.t, point.angle, result.h, static_cast<long long>(result.level), point.energy,
               point.formula, point.dq ? CsvWriter::Cell(*point.dq) : CsvWriter::Cell("--"),
               point.gap ? CsvWriter::Cell(*point.gap) : CsvWriter::Cell("--"),
               point.gap && dq_scale > 0.0 ? CsvWriter::Cell(*point.gap / dq_scale)
                                           : CsvWriter::Cell("--")});
  }
  const std::string table_path = out_path(config, name + ".csv");
  table.save(table_path);
  manifest.add_file(table_path);
  manifest.set("level", static_cast<long long>(config.level));
  manifest.set("h", result.h);
  manifest.set("max_abs_formula", result.max_abs_formula);
  manifest.add_timing("total", total.ms());
  manifest.save(out_path(config, name + "_manifest.json"));
  return result;
}

}  // namespace

RotationSweepResult run_two_particle_rotation(const ExperimentConfig& config) {
  apply_threads(config);
  return rotation_sweep_impl(config, two_particle_set(config.params, 0.5, 0.2, 0.2),
                             "two_particle_rotation");
}

RotationSweepResult run_single_null(const ExperimentConfig& config) {
  apply_threads(config);
  return rotation_sweep_impl(config, single_particle_set(config.params, 0.5, 0.2), "single_null");
}

OrientationResult run_orientation(const ExperimentConfig& config) {
  apply_threads(config);
  const double beta = config.beta_value();
  RunManifest manifest("orientation");
  manifest_basics(manifest, config);
  Stopwatch total;

  const SurfaceMesh mesh = build_icosphere(config.params, config.level);
  const Operators ops = assemble(mesh);
  const auto particles = two_particle_set(config.params, 0.3, 0.9, 10.0);

  OrientationResult result;
  result.level = config.level;
  result.h = mesh_size(mesh);

  Configuration e = zero_config(particles.size());
  e[0].tau = Vec3(0, 1, 0);

  auto evaluate = [&](const Configuration& p, const std::string& label) {
    std::vector<Particle> moved;
    const MembraneSolution sol =
        solve_configuration(mesh, config.params, particles, p, beta, &moved, &ops);
    const double delta = config.delta > 0.0 ? config.delta : default_curl_delta(mesh, moved);
    const CurlField field(moved, e, delta, config.params);
    const Eigen::Matrix3Xd nodal =
        interpolate_field(mesh, [&field](const Vec3& x) { return field(x); });
    const double value = derivative_functional(mesh, config.params, sol, nodal);

    VtkPointData data;
    data.scalars.emplace_back("u", sol.u);
    data.scalars.emplace_back("w", sol.w);
    data.vectors.emplace_back("V", nodal);
    const std::string vtk_path = out_path(config, "orientation_" + label + ".vtk");
    write_vtk(mesh, vtk_path, data);
    manifest.add_file(vtk_path);
    manifest.set("delta_" + label, delta);
    return value;
  };

  const Configuration p0 = zero_config(particles.size());
  result.formula_at_zero = evaluate(p0, "p0");
  Configuration rotated = p0;
  rotated[0].alpha = 0.5 * std::numbers::pi;
  result.formula_at_rotated = evaluate(rotated, "rotated");

  CsvWriter table({"configuration", "h", "level", "direction", "formula"});
  table.row({std::string("p=0"), result.h, static_cast<long long>(result.level),
             std::string("tau=(0,1,0) at particle 1"), result.formula_at_zero});
  table.row({std::string("p=(pi/2,0,0,0)"), result.h, static_cast<long long>(result.level),
             std::string("tau=(0,1,0) at particle 1"), result.formula_at_rotated});
  const std::string table_path = out_path(config, "orientation.csv");
  table.save(table_path);
  manifest.add_file(table_path);
  manifest.set("formula_at_zero", result.formula_at_zero);
  manifest.set("formula_at_rotated", result.formula_at_rotated);
  manifest.set("level", static_cast<long long>(config.level));

  if (config.with_null_and_rotation) {
    result.rotation_sweep = run_two_particle_rotation(config);
    result.null_sweep = run_single_null(config);
  }
  manifest.add_timing("total", total.ms());
  manifest.save(out_path(config, "orientation_manifest.json"));
  return result;
}

EnergyRunResult run_energy(const ExperimentConfig& config, const std::string& particle_file,
                           bool with_gradient, bool export_solution) {
  apply_threads(config);
  const double beta = config.beta_value();
  RunManifest manifest("energy");
  manifest_basics(manifest, config);
  Stopwatch total;

  const SurfaceMesh mesh = build_icosphere(config.params, config.level);
  const Operators ops = assemble(mesh);
  const auto particles = load_particle_file(particle_file, config.params);
  const Configuration p0 = zero_config(particles.size());

  std::vector<Particle> moved;
  const MembraneSolution sol =
      solve_configuration(mesh, config.params, particles, p0, beta, &moved, &ops);

  EnergyRunResult result;
  result.energy = sol.energy;
  result.max_point_residual = sol.point_residuals.size()
                                  ? sol.point_residuals.cwiseAbs().maxCoeff()
                                  : 0.0;
  if (with_gradient)
    result.gradient = config_gradient(mesh, config.params, particles, p0, beta, config.delta, &ops);

  if (export_solution) {
    VtkPointData data;
    data.scalars.emplace_back("u", sol.u);
    data.scalars.emplace_back("w", sol.w);
    const std::string vtk_path = out_path(config, "solution.vtk");
    write_vtk(mesh, vtk_path, data);
    manifest.add_file(vtk_path);

    CsvWriter dump({"vertex", "u", "w"});
    for (int i = 0; i < mesh.num_vertices(); ++i)
      dump.row({static_cast<long long>(i), sol.u[i], sol.w[i]});
    const std::string csv_path = out_path(config, "solution.csv");
    dump.save(csv_path);
    manifest.add_file(csv_path);
  }

  if (with_gradient) {
    CsvWriter grad({"particle", "d_alpha", "tangent1_x", "tangent1_y", "tangent1_z", "d_tangent1",
                    "tangent2_x", "tangent2_y", "tangent2_z", "d_tangent2"});
    for (std::size_t i = 0; i < result.gradient.size(); ++i) {
      const auto& g = result.gradient[i];
      grad.row({static_cast<long long>(i), g.d_alpha, g.tangent1.x(), g.tangent1.y(),
                g.tangent1.z(), g.d_tangent1, g.tangent2.x(), g.tangent2.y(), g.tangent2.z(),
                g.d_tangent2});
    }
    const std::string grad_path = out_path(config, "gradient.csv");
    grad.save(grad_path);
    manifest.add_file(grad_path);
  }

  manifest.set("energy", result.energy);
  manifest.set("max_point_residual", result.max_point_residual);
  manifest.set("level", static_cast<long long>(config.level));
  manifest.set("particle_file", particle_file);
  manifest.add_timing("total", total.ms());
  manifest.save(out_path(config, "energy_manifest.json"));
  return result;
}

}  // namespace membrane
