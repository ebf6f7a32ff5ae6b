// Command-line driver for the membrane experiments.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "membrane/experiments.hpp"

namespace {

using membrane::ExperimentConfig;

void add_common_options(CLI::App* cmd, ExperimentConfig& config, std::string& config_file) {
  cmd->add_option("--config", config_file, "configuration file (key value lines)");
  cmd->add_option("--kappa", config.params.kappa, "bending rigidity");
  cmd->add_option("--sigma", config.params.sigma, "surface tension");
  cmd->add_option("--radius", config.params.radius, "sphere radius");
  cmd->add_option("--beta", config.beta, "point-constraint penalty (default 1e8 kappa/R^2)");
  cmd->add_option("--delta", config.delta, "curl-field support (default 3h, clamped)");
  cmd->add_option("--output-dir,-o", config.output_dir, "output directory");
  cmd->add_option("--threads", config.threads, "OpenMP thread count (0 = default)");
}

ExperimentConfig finalize(const ExperimentConfig& cli_values, const std::string& config_file,
                          const CLI::App* cmd) {
  if (config_file.empty()) return cli_values;
  // file first, explicit command-line flags override
  ExperimentConfig config = membrane::load_config_file(config_file);
  auto take = [&](const std::string& flag, auto member) {
    if (cmd->count(flag) > 0) config.*member = cli_values.*member;
  };
  if (cmd->count("--kappa")) config.params.kappa = cli_values.params.kappa;
  if (cmd->count("--sigma")) config.params.sigma = cli_values.params.sigma;
  if (cmd->count("--radius")) config.params.radius = cli_values.params.radius;
  take("--beta", &ExperimentConfig::beta);
  take("--delta", &ExperimentConfig::delta);
  take("--output-dir", &ExperimentConfig::output_dir);
  take("--threads", &ExperimentConfig::threads);
  take("--level", &ExperimentConfig::level);
  take("--level-min", &ExperimentConfig::level_min);
  take("--level-max", &ExperimentConfig::level_max);
  take("--points", &ExperimentConfig::sweep_points);
  config.params.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-minimizing near-spherical membranes with point-attached particles:\n"
               "configurational energies and their derivatives"};
  app.require_subcommand(1);

  ExperimentConfig config;
  std::string config_file;

  auto* convergence = app.add_subcommand(
      "convergence", "refinement study of the derivative formula vs difference quotients");
  add_common_options(convergence, config, config_file);
  convergence->add_option("--level-min", config.level_min, "coarsest level");
  convergence->add_option("--level-max", config.level_max, "finest level");

  auto* sweep_aligned = app.add_subcommand(
      "sweep-aligned", "five-point sweep with the moving site snapped to mesh vertices");
  add_common_options(sweep_aligned, config, config_file);
  sweep_aligned->add_option("--level", config.level, "mesh level");
  sweep_aligned->add_option("--points", config.sweep_points, "number of sweep samples");

  auto* sweep_offgrid =
      app.add_subcommand("sweep-offgrid", "five-point sweep with off-vertex constraint sites");
  add_common_options(sweep_offgrid, config, config_file);
  sweep_offgrid->add_option("--level", config.level, "mesh level");
  sweep_offgrid->add_option("--points", config.offgrid_points, "number of sweep samples");

  auto* rotation = app.add_subcommand("two-particle-rotation",
                                      "rotation sweep of one 8-point particle against another");
  add_common_options(rotation, config, config_file);
  rotation->add_option("--level", config.level, "mesh level");
  rotation->add_option("--points", config.rotation_points, "number of sweep samples");

  auto* null_sweep = app.add_subcommand(
      "single-null", "single-particle rotation sweep; the derivative approximates zero");
  add_common_options(null_sweep, config, config_file);
  null_sweep->add_option("--level", config.level, "mesh level");
  null_sweep->add_option("--points", config.rotation_points, "number of sweep samples");

  auto* orientation = app.add_subcommand(
      "orientation", "derivative of two 8-point particles in both orientations");
  add_common_options(orientation, config, config_file);
  orientation->add_option("--level", config.level, "mesh level");
  orientation->add_flag("--sweeps", config.with_null_and_rotation,
                        "also run the rotation and single-particle sweeps");

  auto* energy = app.add_subcommand("energy", "energy for particles from a definition file");
  add_common_options(energy, config, config_file);
  energy->add_option("--level", config.level, "mesh level");
  std::string particle_file;
  energy->add_option("--particles", particle_file, "particle definition file")->required();
  bool with_gradient = false, export_solution = false;
  energy->add_flag("--gradient", with_gradient, "also compute the configuration gradient");
  energy->add_flag("--export-solution", export_solution, "write VTK/CSV of the solution");

  auto* mesh_cmd = app.add_subcommand("mesh", "build an icosphere and export it");
  add_common_options(mesh_cmd, config, config_file);
  mesh_cmd->add_option("--level", config.level, "mesh level");

  CLI11_PARSE(app, argc, argv);

  try {
    if (convergence->parsed()) {
      const auto cfg = finalize(config, config_file, convergence);
      const auto result = membrane::run_convergence(cfg);
      std::printf("levels %d..%d  formula limit %.6g  dq limit %.6g\n", cfg.level_min,
                  cfg.level_max, result.formula_limit, result.dq_limit);
      for (std::size_t i = 0; i < result.eoc_formula.size(); ++i)
        std::printf("EOC level %d->%d: formula %.3f  dq %.3f\n", result.rows[i + 1].level,
                    result.rows[i + 2].level, result.eoc_formula[i], result.eoc_dq[i]);
    } else if (sweep_aligned->parsed() || sweep_offgrid->parsed()) {
      const bool aligned = sweep_aligned->parsed();
      const auto cfg = finalize(config, config_file, aligned ? sweep_aligned : sweep_offgrid);
      const auto result = membrane::run_sweep(cfg, aligned);
      std::printf("%s sweep at level %d (h=%.4g): %zu stations, max interior |formula-dq|/max|dq| "
                  "= %.4g\n",
                  aligned ? "aligned" : "off-grid", result.level, result.h, result.points.size(),
                  result.max_interior_rel_gap);
    } else if (rotation->parsed()) {
      const auto cfg = finalize(config, config_file, rotation);
      const auto result = membrane::run_two_particle_rotation(cfg);
      std::printf("two-particle rotation sweep at level %d: max |formula| = %.6g\n", result.level,
                  result.max_abs_formula);
    } else if (null_sweep->parsed()) {
      const auto cfg = finalize(config, config_file, null_sweep);
      const auto result = membrane::run_single_null(cfg);
      std::printf("single-particle sweep at level %d: max |formula| = %.6g\n", result.level,
                  result.max_abs_formula);
    } else if (orientation->parsed()) {
      const auto cfg = finalize(config, config_file, orientation);
      const auto result = membrane::run_orientation(cfg);
      std::printf("orientation at level %d: formula(p=0) = %.6g, formula(rotated) = %.6g\n",
                  result.level, result.formula_at_zero, result.formula_at_rotated);
    } else if (energy->parsed()) {
      const auto cfg = finalize(config, config_file, energy);
      const auto result = membrane::run_energy(cfg, particle_file, with_gradient, export_solution);
      std::printf("energy = %.10g  (max point residual %.3g)\n", result.energy,
                  result.max_point_residual);
      for (std::size_t i = 0; i < result.gradient.size(); ++i) {
        const auto& g = result.gradient[i];
        std::printf("particle %zu: d_alpha = %.6g, d_t1 = %.6g, d_t2 = %.6g\n", i, g.d_alpha,
                    g.d_tangent1, g.d_tangent2);
      }
    } else if (mesh_cmd->parsed()) {
      const auto cfg = finalize(config, config_file, mesh_cmd);
      const auto mesh = membrane::build_icosphere(cfg.params, cfg.level);
      std::filesystem::create_directories(cfg.output_dir);
      const std::string obj = cfg.output_dir + "/icosphere_" + std::to_string(cfg.level) + ".obj";
      const std::string vtk = cfg.output_dir + "/icosphere_" + std::to_string(cfg.level) + ".vtk";
      membrane::write_obj(mesh, obj);
      membrane::write_vtk(mesh, vtk);
      std::printf("level %d: %d vertices, %d triangles, h = %.6g -> %s, %s\n", cfg.level,
                  mesh.num_vertices(), mesh.num_triangles(), membrane::mesh_size(mesh), obj.c_str(),
                  vtk.c_str());
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
