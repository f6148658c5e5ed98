#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lcfem/flow.hpp"
#include "lcfem/mesh.hpp"

namespace lcfem {

/// Radial unit field x/|x| (the degree-one point defect). Throws for |x|
/// below 1e-12; the ball meshes keep all nodes away from the center.
Vec3 degree1_field(const Vec3& x);

/// Degree-two point defect: square the stereographic image of x/|x| and map
/// back. Directions within 1e-12 of the north pole return e3.
Vec3 degree2_field(const Vec3& x);

/// Perturbed uniform state (e1 + u)/|e1 + u| with
/// u = 256 [x(1-x) y(1-y)]^2 z(1/2 - z) e3 on the slab (0,1)^2 x (0,1/2).
Vec3 freedericksz_initial(const Vec3& x);

/// Rescales every nodal value to unit length; throws on a zero nodal value.
void nodal_normalize(DirectorField& field);

/// A complete experiment description: domain, Dirichlet data, initial field,
/// material constants and flow parameters.
struct Scenario {
  enum class Domain { Box, Ball, Colloid, File };

  std::string name;
  Domain domain = Domain::Ball;
  double mesh_h = 0.125;  // target resolution; generators round to their grids

  // Box domain.
  Vec3 box_lo{0, 0, 0}, box_hi{1, 1, 1};
  // Ball domain.
  double ball_radius = 1.0;
  // Colloid domain.
  double colloid_outer = 2.0, colloid_hole = 0.75;
  // Imported domain.
  std::string mesh_path;

  std::vector<std::string> dirichlet_regions;
  std::function<Vec3(const Vec3&)> boundary_g;
  std::function<Vec3(const Vec3&)> initial_field;

  FrankConstants constants;
  FlowConfig flow;
};

/// Built-in presets: "helein", "degree2", "freedericksz", "colloid".
/// Throws std::invalid_argument for unknown names.
Scenario make_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Parses a flat key/value config file ([scenario]/[mesh]/[constants]/
/// [flow]/[output] sections). The file may start from a preset and override
/// individual keys. Returns the scenario plus the output keys found.
struct ScenarioFile {
  Scenario scenario;
  std::string out_dir;
  int vtk_every = 0;
};
ScenarioFile load_scenario_file(const std::string& path);

struct RunOptions {
  std::string out_dir;  // empty: no files are written
  int vtk_every = 0;    // also write every N-th step as step_N.vtk
};

struct RunReport {
  EnergyBreakdown initial_energy;
  EnergyBreakdown final_energy;
  int iterations = 0;
  double err1 = 0.0;
  double err_inf = 0.0;
  double boundary_error = 0.0;
  std::string status;  // "converged" or "max_steps"
  std::vector<std::string> files;
};

/// Builds the mesh, applies nodal normalization to the interpolated initial
/// field, runs the flow, and writes history.csv / report.json / initial.vtk /
/// final.vtk into out_dir. A flow abort is rethrown after the partial
/// outputs are written.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options);

/// The mesh a scenario would run on (exposed for inspection and tests).
TetMesh build_scenario_mesh(const Scenario& scenario);

void write_report_json(const RunReport& report, const std::string& path);

}  // namespace lcfem
