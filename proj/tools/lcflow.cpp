#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lcfem/scenario.hpp"

using namespace lcfem;

namespace {

void print_report(const RunReport& rep) {
  std::printf("status        : %s after %d steps\n", rep.status.c_str(), rep.iterations);
  std::printf("energy        : %.6g -> %.6g\n", rep.initial_energy.total, rep.final_energy.total);
  std::printf("  one-constant: %.6g -> %.6g\n", rep.initial_energy.one_constant,
              rep.final_energy.one_constant);
  std::printf("  splay/twist/bend (raw): %.4g/%.4g/%.4g -> %.4g/%.4g/%.4g\n",
              rep.initial_energy.splay, rep.initial_energy.twist, rep.initial_energy.bend,
              rep.final_energy.splay, rep.final_energy.twist, rep.final_energy.bend);
  std::printf("  magnetic    : %.6g -> %.6g\n", rep.initial_energy.magnetic,
              rep.final_energy.magnetic);
  std::printf("constraint    : err1 %.4g, err_inf %.4g\n", rep.err1, rep.err_inf);
  std::printf("boundary error: %.4g\n", rep.boundary_error);
  for (const auto& f : rep.files) std::printf("wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frank-Oseen director relaxation on tetrahedral meshes"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a preset or a config file");
  run->set_help_flag("--help", "Print help");  // frees up --h for the mesh size
  std::string target;
  run->add_option("target", target, "Preset name (helein, degree2, freedericksz, colloid) or config path")
      ->required();
  double h = 0.0, tau = 0.0, eps = 0.0, H_mag = -1.0;
  int max_steps = 0, vtk_every = 0;
  std::string out_dir;
  run->add_option("--h", h, "Target mesh resolution");
  run->add_option("--tau", tau, "Pseudotime step (default: preset value)");
  run->add_option("--eps", eps, "Stopping tolerance");
  run->add_option("--max-steps", max_steps, "Iteration cap");
  run->add_option("--H", H_mag, "Magnetic field magnitude override (preset direction)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--vtk-every", vtk_every, "Write a VTK snapshot every N steps");

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario scenario;
    RunOptions options;
    if (std::filesystem::exists(target) && !std::filesystem::is_directory(target)) {
      ScenarioFile file = load_scenario_file(target);
      scenario = std::move(file.scenario);
      options.out_dir = file.out_dir;
      options.vtk_every = file.vtk_every;
    } else {
      scenario = make_preset(target);
    }
    if (h > 0.0) {
      scenario.mesh_h = h;
      if (tau <= 0.0) scenario.flow.tau = h;  // tau tracks h unless set explicitly
    }
    if (tau > 0.0) scenario.flow.tau = tau;
    if (eps > 0.0) scenario.flow.eps = eps;
    if (max_steps > 0) scenario.flow.max_steps = max_steps;
    if (H_mag >= 0.0) {
      // Preset field directions: freedericksz uses e3, colloid uses e2.
      const Vec3 dir = scenario.name == "colloid" ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
      scenario.constants.field =
          H_mag == 0.0 ? MagneticField::none() : MagneticField::constant(H_mag * dir);
      if (scenario.constants.chi_A == 0.0) scenario.constants.chi_A = 1.0;
    }
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (vtk_every > 0) options.vtk_every = vtk_every;
    if (options.out_dir.empty()) options.out_dir = "out_" + scenario.name;

    std::printf("scenario %s: h=%g tau=%g eps=%g\n", scenario.name.c_str(), scenario.mesh_h,
                scenario.flow.tau, scenario.flow.eps);
    const RunReport report = run_scenario(scenario, options);
    print_report(report);
    return report.status == "converged" ? 0 : 2;
  } catch (const FlowError& err) {
    std::cerr << "flow aborted: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
