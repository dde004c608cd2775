#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pabf/checks.hpp"
#include "pabf/driver.hpp"
#include "pabf/errors.hpp"
#include "pabf/field_io.hpp"
#include "pabf/projection.hpp"
#include "pabf/run_config.hpp"

namespace {

std::string slurp(const std::string& path)
{
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out_override, bool has_seed,
            std::uint64_t seed)
{
  pabf::RunSpec spec = pabf::parse_config(config_path.empty() ? "" : slurp(config_path));
  if (has_seed) spec.seed = seed;
  if (!out_override.empty()) spec.output_dir = out_override;

  const pabf::RunOutput out = pabf::run(spec);
  pabf::write_run_output(spec.output_dir, out);
  std::cout << "run complete: " << out.snapshots.size() << " snapshots, "
            << out.final_state.total_count() << " deposits -> " << spec.output_dir << '\n';
  return 0;
}

int cmd_compare(const std::string& config_path, int replicas, const std::string& out_override)
{
  pabf::RunSpec spec = pabf::parse_config(config_path.empty() ? "" : slurp(config_path));
  if (!out_override.empty()) spec.output_dir = out_override;

  const pabf::ComparisonResult cmp = pabf::compare_modes(spec, replicas);
  pabf::write_comparison(spec.output_dir, cmp);
  std::cout << "compare complete: " << replicas << " runs per mode, " << cmp.rows.size()
            << " matched snapshots -> " << spec.output_dir << '\n';
  return 0;
}

int cmd_project_file(const std::string& force_path, const std::string& density_path,
                     const std::string& out_dir, double tol)
{
  const pabf::VectorFieldd F = pabf::read_vector_field(force_path);
  const pabf::ScalarFieldd psi = pabf::read_scalar_field(density_path);

  const pabf::ProjectionResultd res = pabf::project(F, psi, tol);

  std::filesystem::create_directories(out_dir);
  pabf::write_field(std::filesystem::path(out_dir) / "A.csv", res.A);
  pabf::write_field(std::filesystem::path(out_dir) / "gradA.csv", res.gradA);
  {
    std::ofstream os(std::filesystem::path(out_dir) / "projection.txt");
    os << "iterations = " << res.iterations << '\n';
    os << "residual_div = " << pabf::format_double(res.residual_div) << '\n';
    os << "defect = " << pabf::format_double(pabf::projection_defect(F, psi, res)) << '\n';
  }
  std::cout << "projection complete: " << res.iterations << " iterations, relative residual "
            << res.residual_div << " -> " << out_dir << '\n';
  return 0;
}

int cmd_check(bool quick)
{
  const auto results = pabf::run_checks(quick);
  for (const auto& r : results)
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << '\n';
  return pabf::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Adaptive biasing force sampling with gradient projection"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "execute one configured run");
  run_cmd->add_option("--config", config_path, "run configuration file");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the configured seed");
  run_cmd->add_option("--out", out_dir, "override the configured output directory");

  int replicas = 8;
  auto* compare_cmd =
      app.add_subcommand("compare", "replicated runs in both modes plus joint comparison");
  compare_cmd->add_option("--config", config_path, "run configuration file");
  compare_cmd->add_option("--replicas", replicas, "independent runs per mode")
      ->check(CLI::Range(2, 1024));
  compare_cmd->add_option("--out", out_dir, "output directory");

  std::string force_path, density_path;
  double tol = 1e-8;
  auto* project_cmd =
      app.add_subcommand("project-file", "project a force field onto a gradient");
  project_cmd->add_option("--force", force_path, "vector field CSV")->required();
  project_cmd->add_option("--density", density_path, "scalar density CSV")->required();
  project_cmd->add_option("--out", out_dir, "output directory")->required();
  project_cmd->add_option("--tol", tol, "relative solver tolerance");

  bool quick = false;
  auto* check_cmd = app.add_subcommand("check", "run the built-in invariant suite");
  check_cmd->add_flag("--quick", quick, "reduced sampling budgets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir, seed_opt->count() > 0, seed);
    if (compare_cmd->parsed()) return cmd_compare(config_path, replicas, out_dir);
    if (project_cmd->parsed()) return cmd_project_file(force_path, density_path, out_dir, tol);
    if (check_cmd->parsed()) return cmd_check(quick);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
