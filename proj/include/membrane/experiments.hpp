#pragma once

#include <optional>
#include <string>
#include <vector>

#include "membrane/derivative.hpp"
#include "membrane/particle.hpp"

namespace membrane {

struct ExperimentConfig {
  ModelParams params;
  int level = 5;                 // mesh level for single-level experiments
  int level_min = 2;             // convergence ladder
  int level_max = 6;
  double beta = 0.0;             // 0 -> default 1e8 kappa / R^2
  double delta = 0.0;            // curl-field support; 0 -> default 3h clamp
  int sweep_points = 33;         // aligned sweep sample count (t = m/32)
  int offgrid_points = 101;      // off-grid sweep sample count (t = m/100)
  int rotation_points = 33;      // rotation sweeps (t = m/16, t <= 2)
  std::string output_dir = "out";
  bool with_null_and_rotation = false;  // orientation run also performs the
                                        // rotation and single-particle sweeps
  int threads = 0;               // 0 leaves the OpenMP default

  double beta_value() const {
    return beta > 0.0 ? beta
                      : 1e8 * params.kappa / (params.radius * params.radius);
  }
};

/// Parses `key value` / `key = value` lines; '#' starts a comment.
ExperimentConfig load_config_file(const std::string& path);

/// Built-in particle sets.
std::vector<Particle> convergence_particles(const ModelParams& params);
std::vector<Particle> sweep_particles(const ModelParams& params, double polar_angle);
std::vector<Particle> two_particle_set(const ModelParams& params, double spread,
                                       double z_coeff_first, double z_coeff_second);
std::vector<Particle> single_particle_set(const ModelParams& params, double spread,
                                          double z_coeff);

/// theta(t) = arcsin(t / sqrt(t^2 + (t-1)^2)): polar angle of the radially
/// projected point (t, 0, 1-t).
double sweep_angle(double t);

/// Vertices lying on the meridian y = 0, as (signed polar angle, vertex
/// index) sorted by angle; phi = atan2(x, z) so phi > 0 is the x > 0 half.
std::vector<std::pair<double, int>> meridian_vertices(const SurfaceMesh& mesh);

/// Derivative at 0 of a function sampled at -b, 0, a (exact on quadratics).
double three_point_derivative(double f_minus, double f_zero, double f_plus, double b, double a);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double step_plus = 0.0, step_minus = 0.0;  // snapped one-lattice DQ offsets
  double energy_minus = 0.0, energy_zero = 0.0, energy_plus = 0.0;
  double formula = 0.0, dq = 0.0;
  double delta = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double formula_limit = 0.0;  // extrapolated
  double dq_limit = 0.0;
  // errors against the finest level and EOC between consecutive levels
  std::vector<double> err_formula, err_dq, eoc_formula, eoc_dq;
};

ConvergenceResult run_convergence(const ExperimentConfig& config);

struct SweepPoint {
  double t = 0.0;      // sweep parameter
  double angle = 0.0;  // polar angle of the moving site
  double energy = 0.0;
  double formula = 0.0;
  std::optional<double> dq;
  std::optional<double> gap;  // |formula - dq|
};

struct SweepResult {
  int level = 0;
  double h = 0.0;
  std::vector<SweepPoint> points;
  double dq_scale = 0.0;              // max |dq| over the sweep
  double max_interior_rel_gap = 0.0;  // max interior |formula-dq| / dq_scale
  int energy_sign_changes = 0;        // sign changes of the energy increments
};

SweepResult run_sweep(const ExperimentConfig& config, bool aligned);

struct RotationSweepResult {
  int level = 0;
  double h = 0.0;
  std::vector<SweepPoint> points;  // t in [0,2], angle = alpha
  double max_abs_formula = 0.0;
};

/// Rotation of the first 8-point particle about its centre normal, with the
/// second particle fixed.
RotationSweepResult run_two_particle_rotation(const ExperimentConfig& config);

/// Same sweep for the single particle: the derivative approximates zero.
RotationSweepResult run_single_null(const ExperimentConfig& config);

struct OrientationResult {
  int level = 0;
  double h = 0.0;
  double formula_at_zero = 0.0;
  double formula_at_rotated = 0.0;
  std::optional<RotationSweepResult> rotation_sweep;
  std::optional<RotationSweepResult> null_sweep;
};

OrientationResult run_orientation(const ExperimentConfig& config);

/// Generic custom run: energy (and optionally the gradient) for particles
/// from a definition file.
struct EnergyRunResult {
  double energy = 0.0;
  double max_point_residual = 0.0;
  std::vector<ParticleGradient> gradient;  // empty unless requested
};

EnergyRunResult run_energy(const ExperimentConfig& config, const std::string& particle_file,
                           bool with_gradient, bool export_solution);

}  // namespace membrane
