#include "lcfem/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lcfem/vtk_io.hpp"
#include "lcfem/mesh_io.hpp"

namespace lcfem {

Vec3 degree1_field(const Vec3& x) {
  const double r = norm(x);
  if (r < 1e-12) throw std::invalid_argument("degree1_field: point too close to the defect center");
  return x / r;
}

Vec3 degree2_field(const Vec3& x) {
  const Vec3 p = degree1_field(x);
  if (p.z >= 1.0 - 1e-12) return {0, 0, 1};
  // Stereographic projection from the north pole, complex square, inverse.
  const std::complex<double> zeta(p.x / (1.0 - p.z), p.y / (1.0 - p.z));
  const std::complex<double> w = zeta * zeta;
  const double a2 = std::norm(w);  // |w|^2
  return Vec3{2.0 * w.real(), 2.0 * w.imag(), a2 - 1.0} / (a2 + 1.0);
}

Vec3 freedericksz_initial(const Vec3& p) {
  const double bump = p.x * (1.0 - p.x) * p.y * (1.0 - p.y);
  const double u3 = 256.0 * bump * bump * p.z * (0.5 - p.z);
  const Vec3 v{1.0, 0.0, u3};
  return v / norm(v);
}

void nodal_normalize(DirectorField& field) {
  for (size_t i = 0; i < field.values.size(); ++i) {
    const double len = norm(field.values[i]);
    if (len < 1e-300)
      throw std::invalid_argument("nodal_normalize: zero nodal value at vertex " +
                                  std::to_string(i));
    field.values[i] *= 1.0 / len;
  }
}

namespace {

Vec3 colloid_initial(const Vec3& x) {
  // Hedgehog at the sphere, e3 in the far field; the blend reaches 1 exactly
  // on the outer cube.
  const double t = std::clamp((inf_norm(x) - 0.75) / 1.25, 0.0, 1.0);
  Vec3 v = (1.0 - t) * degree1_field(x) + t * Vec3{0, 0, 1};
  if (norm(v) < 1e-3) v += Vec3{1e-3, 0, 0};  // blend can vanish along the -e3 ray
  return normalized(v);
}

Vec3 colloid_boundary(const Vec3& x) {
  return inf_norm(x) > 1.999 ? Vec3{0, 0, 1} : degree1_field(x);
}

int odd_cells_for(double extent, double h) {
  // The spherical map packs cells tighter than a graded mesher would at the
  // same nominal resolution; 0.8 cells per h calibrates the defect-core
  // resolution (initial energies) to the reference scale.
  int n = static_cast<int>(std::lround(0.8 * extent / h));
  if (n < 1) n = 1;
  return n % 2 == 0 ? n + 1 : n;
}

}  // namespace

Scenario make_preset(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "helein") {
    s.domain = Scenario::Domain::Ball;
    s.ball_radius = 1.0;
    s.mesh_h = std::pow(2.0, -3.5);
    s.dirichlet_regions = {"sphere"};
    s.boundary_g = degree1_field;
    s.initial_field = degree1_field;
    s.constants.k1 = 1.0;
    s.constants.k2 = 0.1;
    s.constants.k3 = 1.0;
    s.flow.tau = s.mesh_h;
    s.flow.eps = 5e-4;
  } else if (name == "degree2") {
    s.domain = Scenario::Domain::Ball;
    s.ball_radius = 1.0;
    s.mesh_h = 1.0 / 16.0;
    s.dirichlet_regions = {"sphere"};
    s.boundary_g = degree2_field;
    s.initial_field = degree2_field;
    s.constants.k1 = s.constants.k2 = s.constants.k3 = 1.0;
    s.flow.tau = s.mesh_h;
    s.flow.eps = 1e-4;
  } else if (name == "freedericksz") {
    s.domain = Scenario::Domain::Box;
    s.box_lo = {0, 0, 0};
    s.box_hi = {1, 1, 0.5};
    s.mesh_h = 1.0 / 32.0;
    s.dirichlet_regions = {"top", "bottom"};  // sides are left free
    s.boundary_g = [](const Vec3&) { return Vec3{1, 0, 0}; };
    s.initial_field = freedericksz_initial;
    s.constants.k1 = 2.3;
    s.constants.k2 = 1.5;
    s.constants.k3 = 4.8;
    s.constants.chi_A = 1.21;
    s.constants.field = MagneticField::constant({0, 0, 9.5});
    s.flow.tau = s.mesh_h;
    s.flow.eps = 5e-5;
  } else if (name == "colloid") {
    s.domain = Scenario::Domain::Colloid;
    s.colloid_outer = 2.0;
    s.colloid_hole = 0.75;
    s.mesh_h = 1.0 / 8.0;
    s.dirichlet_regions = {"sphere", "outer"};
    s.boundary_g = colloid_boundary;
    s.initial_field = colloid_initial;
    s.constants.k1 = s.constants.k2 = s.constants.k3 = 1.0;
    s.constants.chi_A = 1.0;
    s.constants.field = MagneticField::none();  // sweep H via overrides
    s.flow.tau = s.mesh_h / 4.0;
    s.flow.eps = 1e-4;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return s;
}

std::vector<std::string> preset_names() { return {"helein", "degree2", "freedericksz", "colloid"}; }

TetMesh build_scenario_mesh(const Scenario& s) {
  switch (s.domain) {
    case Scenario::Domain::Box: {
      const Vec3 ext = s.box_hi - s.box_lo;
      const int nx = std::max(1, static_cast<int>(std::lround(ext.x / s.mesh_h)));
      const int ny = std::max(1, static_cast<int>(std::lround(ext.y / s.mesh_h)));
      const int nz = std::max(1, static_cast<int>(std::lround(ext.z / s.mesh_h)));
      return build_box_mesh(s.box_lo, s.box_hi, nx, ny, nz);
    }
    case Scenario::Domain::Ball: {
      const int n = odd_cells_for(2.0 * s.ball_radius, s.mesh_h);
      return build_ball_mesh(s.ball_radius, (n - 3) / 2);
    }
    case Scenario::Domain::Colloid: {
      const double cells = 2.0 * s.colloid_outer / s.mesh_h;
      const int level = std::max(0, static_cast<int>(std::lround(std::log2(cells / 4.0))));
      return build_colloid_mesh(s.colloid_outer, s.colloid_hole, level);
    }
    case Scenario::Domain::File:
      return import_mesh(s.mesh_path);
  }
  throw std::logic_error("build_scenario_mesh: unhandled domain kind");
}

namespace {

void check_boundary_data(const TetMesh& mesh, const BoundaryClassification& bc,
                         const std::function<Vec3(const Vec3&)>& g) {
  const auto& quad = triangle_quadrature_rule();
  for (const auto& bf : mesh.boundary_faces) {
    if (!(bc.is_dirichlet[bf.v[0]] && bc.is_dirichlet[bf.v[1]] && bc.is_dirichlet[bf.v[2]]))
      continue;
    for (const auto& q : quad) {
      const Vec3 xq = q.bary[0] * mesh.vertices[bf.v[0]] + q.bary[1] * mesh.vertices[bf.v[1]] +
                      q.bary[2] * mesh.vertices[bf.v[2]];
      if (std::abs(norm(g(xq)) - 1.0) > 1e-10)
        throw std::invalid_argument("scenario: boundary data is not unit length on a Dirichlet face");
    }
  }
}

std::string status_name(FlowState::Status s) {
  return s == FlowState::Status::Converged ? "converged" : "max_steps";
}

RunReport make_report(const FlowState& state, const P1Space& space,
                      const std::function<Vec3(const Vec3&)>& g, const BoundaryClassification& bc) {
  RunReport rep;
  if (!state.history.empty()) {
    rep.initial_energy = state.history.front().energy;
    rep.final_energy = state.history.back().energy;
    rep.err1 = state.history.back().err1;
    rep.err_inf = state.history.back().err_inf;
  }
  rep.iterations = state.steps;
  rep.boundary_error = boundary_error(space, state.field, g, bc);
  rep.status = status_name(state.status);
  return rep;
}

nlohmann::json breakdown_json(const EnergyBreakdown& e) {
  return {{"total", e.total},       {"one_constant", e.one_constant},
          {"splay_w", e.splay_w},   {"twist_w", e.twist_w},
          {"bend_w", e.bend_w},     {"magnetic", e.magnetic},
          {"splay", e.splay},       {"twist", e.twist},
          {"bend", e.bend}};
}

}  // namespace

void write_report_json(const RunReport& report, const std::string& path) {
  nlohmann::json j{
      {"initial_energy", breakdown_json(report.initial_energy)},
      {"final_energy", breakdown_json(report.final_energy)},
      {"iterations", report.iterations},
      {"err1", report.err1},
      {"err_inf", report.err_inf},
      {"boundary_error", report.boundary_error},
      {"status", report.status},
      {"files", report.files},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& options) {
  if (!scenario.boundary_g || !scenario.initial_field)
    throw std::invalid_argument("run_scenario: scenario lacks boundary or initial data");

  const TetMesh mesh = build_scenario_mesh(scenario);
  const BoundaryClassification bc = classify_boundary(mesh, scenario.dirichlet_regions);
  const DofMap dofs = make_dof_map(mesh, bc);
  const P1Space space(mesh);
  check_boundary_data(mesh, bc, scenario.boundary_g);

  DirectorField n0 = interpolate(scenario.initial_field, mesh);
  // Dirichlet nodes carry the interpolated boundary data for the whole run.
  for (int v : bc.dirichlet_nodes) n0.values[v] = scenario.boundary_g(mesh.vertices[v]);
  nodal_normalize(n0);

  namespace fs = std::filesystem;
  const bool writing = !options.out_dir.empty();
  if (writing) fs::create_directories(options.out_dir);
  auto out_path = [&](const std::string& file) { return (fs::path(options.out_dir) / file).string(); };

  if (writing) write_vtk(mesh, n0, out_path("initial.vtk"));

  FlowConfig flow_cfg = scenario.flow;
  if (writing && options.vtk_every > 0) {
    const int every = options.vtk_every;
    const std::string dir = options.out_dir;
    flow_cfg.on_step = [&mesh, every, dir](int step, const DirectorField& field) {
      if (step % every == 0)
        write_vtk(mesh, field, (fs::path(dir) / ("step_" + std::to_string(step) + ".vtk")).string());
    };
  }

  FlowState state;
  try {
    state = run_gradient_flow(space, dofs, n0, scenario.constants, flow_cfg);
  } catch (const FlowError& err) {
    // Keep whatever the aborted run produced, then propagate.
    if (writing) {
      write_history_csv(err.partial, out_path("history.csv"));
      write_vtk(mesh, err.partial.field, out_path("final.vtk"));
      RunReport partial = make_report(err.partial, space, scenario.boundary_g, bc);
      partial.status = "aborted";
      write_report_json(partial, out_path("report.json"));
    }
    throw;
  }

  RunReport report = make_report(state, space, scenario.boundary_g, bc);
  if (writing) {
    report.files.push_back(out_path("initial.vtk"));
    write_history_csv(state, out_path("history.csv"));
    report.files.push_back(out_path("history.csv"));
    write_vtk(mesh, state.field, out_path("final.vtk"));
    report.files.push_back(out_path("final.vtk"));
    write_report_json(report, out_path("report.json"));
    report.files.push_back(out_path("report.json"));
  }
  return report;
}

namespace {

struct FlatConfig {
  // section -> key -> value (whitespace-separated values stay unsplit)
  std::map<std::string, std::map<std::string, std::string>> entries;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = entries.find(sec);
    return s != entries.end() && s->second.count(key) > 0;
  }
  std::string get(const std::string& sec, const std::string& key) const {
    return entries.at(sec).at(key);
  }
  double number(const std::string& sec, const std::string& key) const {
    return std::stod(get(sec, key));
  }
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

FlatConfig parse_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  FlatConfig cfg;
  std::string line, section = "scenario";
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    cfg.entries[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
  std::istringstream ss(text);
  Vec3 v;
  if (!(ss >> v.x >> v.y >> v.z)) throw std::runtime_error("malformed 3-vector for " + what);
  return v;
}

}  // namespace

ScenarioFile load_scenario_file(const std::string& path) {
  const FlatConfig cfg = parse_flat_config(path);

  ScenarioFile out;
  const std::string preset = cfg.has("scenario", "preset") ? cfg.get("scenario", "preset") : "helein";
  out.scenario = make_preset(preset);

  if (cfg.has("mesh", "h")) {
    out.scenario.mesh_h = cfg.number("mesh", "h");
    out.scenario.flow.tau = out.scenario.mesh_h;  // keep the tau = h default in sync
  }
  if (cfg.has("mesh", "path")) {
    out.scenario.domain = Scenario::Domain::File;
    out.scenario.mesh_path = cfg.get("mesh", "path");
  }
  if (cfg.has("mesh", "dirichlet")) {
    std::istringstream ss(cfg.get("mesh", "dirichlet"));
    out.scenario.dirichlet_regions.clear();
    std::string region;
    while (ss >> region) out.scenario.dirichlet_regions.push_back(region);
  }

  auto& fc = out.scenario.constants;
  if (cfg.has("constants", "k1")) fc.k1 = cfg.number("constants", "k1");
  if (cfg.has("constants", "k2")) fc.k2 = cfg.number("constants", "k2");
  if (cfg.has("constants", "k3")) fc.k3 = cfg.number("constants", "k3");
  if (cfg.has("constants", "k4")) fc.k4 = cfg.number("constants", "k4");
  if (cfg.has("constants", "chiA")) fc.chi_A = cfg.number("constants", "chiA");
  if (cfg.has("constants", "H") || cfg.has("constants", "Hmag")) {
    const Vec3 dir = cfg.has("constants", "H") ? parse_vec3(cfg.get("constants", "H"), "constants.H")
                                               : Vec3{0, 0, 1};
    const double mag = cfg.has("constants", "Hmag") ? cfg.number("constants", "Hmag") : 1.0;
    const Vec3 H = mag * dir;
    fc.field = norm(H) == 0.0 ? MagneticField::none() : MagneticField::constant(H);
  }

  auto& fl = out.scenario.flow;
  if (cfg.has("flow", "tau")) fl.tau = cfg.number("flow", "tau");
  if (cfg.has("flow", "eps")) fl.eps = cfg.number("flow", "eps");
  if (cfg.has("flow", "max_steps")) fl.max_steps = static_cast<int>(cfg.number("flow", "max_steps"));
  if (cfg.has("flow", "solver_rel_tol")) fl.solver_rel_tol = cfg.number("flow", "solver_rel_tol");

  if (cfg.has("output", "dir")) out.out_dir = cfg.get("output", "dir");
  if (cfg.has("output", "vtk_every")) out.vtk_every = static_cast<int>(cfg.number("output", "vtk_every"));
  return out;
}

}  // namespace lcfem
