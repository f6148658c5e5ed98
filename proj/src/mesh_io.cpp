#include "lcfem/mesh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lcfem {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

struct LineReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  explicit LineReader(const std::string& p) : in(p), path(p) {
    if (!in) throw std::runtime_error("cannot open mesh file '" + p + "'");
  }

  // Next non-empty line; returns false at EOF.
  bool next(std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (out.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  }

  std::string require(const std::string& what) {
    std::string s;
    if (!next(s)) fail(path, line_no + 1, "unexpected end of file, expected " + what);
    return s;
  }
};

void check_vertex_index(LineReader& r, int v, int nv) {
  if (v < 0 || v >= nv)
    fail(r.path, r.line_no, "vertex index " + std::to_string(v) + " out of range [0," +
                                std::to_string(nv) + ")");
}

void fix_orientation_and_validate(TetMesh& mesh, const std::string& path) {
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const double vol = mesh.tet_volume(static_cast<int>(t));
    if (vol < 0.0) std::swap(mesh.tets[t][2], mesh.tets[t][3]);
    if (mesh.tet_volume(static_cast<int>(t)) <= 0.0)
      throw std::runtime_error(path + ": tet " + std::to_string(t) + " has zero volume");
  }
  mesh.validate();
  mesh.update_mesh_size();
}

TetMesh import_native(LineReader& r) {
  TetMesh mesh;
  std::string line = r.require("header");
  {
    std::istringstream ss(line);
    std::string tag;
    int version = 0;
    ss >> tag >> version;
    if (tag != "tetmesh" || version != 1) fail(r.path, r.line_no, "expected header 'tetmesh 1'");
  }

  line = r.require("'vertices N'");
  std::istringstream vh(line);
  std::string kw;
  int nv = -1;
  vh >> kw >> nv;
  if (kw != "vertices" || nv < 0) fail(r.path, r.line_no, "expected 'vertices N'");
  mesh.vertices.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    std::istringstream ss(r.require("vertex coordinates"));
    Vec3 p;
    if (!(ss >> p.x >> p.y >> p.z)) fail(r.path, r.line_no, "malformed vertex line");
    mesh.vertices.push_back(p);
  }

  line = r.require("'tets M'");
  std::istringstream th(line);
  int nt = -1;
  th >> kw >> nt;
  if (kw != "tets" || nt < 0) fail(r.path, r.line_no, "expected 'tets M'");
  mesh.tets.reserve(nt);
  for (int i = 0; i < nt; ++i) {
    std::istringstream ss(r.require("tet indices"));
    std::array<int, 4> T;
    if (!(ss >> T[0] >> T[1] >> T[2] >> T[3])) fail(r.path, r.line_no, "malformed tet line");
    for (int v : T) check_vertex_index(r, v, nv);
    mesh.tets.push_back(T);
  }

  std::string block;
  while (r.next(block)) {
    std::istringstream fh(block);
    int nf = -1;
    std::string region;
    fh >> kw >> nf >> region;
    if (kw != "faces" || nf < 0 || region.empty())
      fail(r.path, r.line_no, "expected 'faces K <region>'");
    int region_id = mesh.region_id(region);
    if (region_id < 0) {
      region_id = static_cast<int>(mesh.region_names.size());
      mesh.region_names.push_back(region);
    }
    for (int i = 0; i < nf; ++i) {
      std::istringstream ss(r.require("face indices"));
      std::array<int, 3> f;
      if (!(ss >> f[0] >> f[1] >> f[2])) fail(r.path, r.line_no, "malformed face line");
      for (int v : f) check_vertex_index(r, v, nv);
      mesh.boundary_faces.push_back({f, region_id});
    }
  }
  return mesh;
}

TetMesh import_gmsh(LineReader& r) {
  TetMesh mesh;
  std::map<int, std::string> physical_names;
  std::map<int, int> node_id_map;  // gmsh node id -> vertex index
  std::map<int, int> region_map;   // physical tag -> region id

  auto region_for = [&](int tag) {
    auto it = region_map.find(tag);
    if (it != region_map.end()) return it->second;
    auto name_it = physical_names.find(tag);
    const std::string name =
        name_it != physical_names.end() ? name_it->second : "phys" + std::to_string(tag);
    const int id = static_cast<int>(mesh.region_names.size());
    mesh.region_names.push_back(name);
    region_map[tag] = id;
    return id;
  };

  std::string line = r.require("$MeshFormat");
  if (line.rfind("$MeshFormat", 0) != 0) fail(r.path, r.line_no, "expected $MeshFormat");
  {
    std::istringstream ss(r.require("format version"));
    double version = 0;
    ss >> version;
    if (version < 2.0 || version >= 3.0)
      fail(r.path, r.line_no, "only Gmsh format 2.x ASCII is supported");
  }

  while (r.next(line)) {
    if (line.rfind("$PhysicalNames", 0) == 0) {
      const int n = std::stoi(r.require("count"));
      for (int i = 0; i < n; ++i) {
        std::istringstream ss(r.require("physical name"));
        int dim, tag;
        std::string name;
        ss >> dim >> tag >> name;
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
          name = name.substr(1, name.size() - 2);
        physical_names[tag] = name;
      }
    } else if (line.rfind("$Nodes", 0) == 0) {
      const int n = std::stoi(r.require("node count"));
      for (int i = 0; i < n; ++i) {
        std::istringstream ss(r.require("node"));
        int id;
        Vec3 p;
        if (!(ss >> id >> p.x >> p.y >> p.z)) fail(r.path, r.line_no, "malformed node line");
        node_id_map[id] = mesh.num_vertices();
        mesh.vertices.push_back(p);
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      const int n = std::stoi(r.require("element count"));
      for (int i = 0; i < n; ++i) {
        std::istringstream ss(r.require("element"));
        int id, type, ntags;
        if (!(ss >> id >> type >> ntags)) fail(r.path, r.line_no, "malformed element line");
        std::vector<int> tags(ntags);
        for (int& t : tags) ss >> t;
        auto node = [&](int gid) {
          auto it = node_id_map.find(gid);
          if (it == node_id_map.end())
            fail(r.path, r.line_no, "element references unknown node " + std::to_string(gid));
          return it->second;
        };
        if (type == 4) {  // linear tet
          std::array<int, 4> T;
          for (int& v : T) {
            int gid;
            if (!(ss >> gid)) fail(r.path, r.line_no, "malformed tet element");
            v = node(gid);
          }
          mesh.tets.push_back(T);
        } else if (type == 2) {  // triangle: boundary face
          std::array<int, 3> f;
          for (int& v : f) {
            int gid;
            if (!(ss >> gid)) fail(r.path, r.line_no, "malformed triangle element");
            v = node(gid);
          }
          mesh.boundary_faces.push_back({f, region_for(ntags > 0 ? tags[0] : 0)});
        } else if (type == 15 || type == 1) {
          // points and lines carry no volume or face information; skip
        } else {
          fail(r.path, r.line_no,
               "unsupported element type " + std::to_string(type) + " (linear tets only)");
        }
      }
    }
    // other sections ($EndNodes, $Comments, ...) are skipped line by line
  }
  if (mesh.tets.empty()) throw std::runtime_error(r.path + ": no tetrahedra found");
  return mesh;
}

}  // namespace

TetMesh import_mesh(const std::string& path) {
  LineReader reader(path);
  std::string first = reader.require("header");
  // Re-open so the format readers see the file from the start.
  LineReader fresh(path);
  TetMesh mesh;
  if (first.rfind("tetmesh", 0) == 0) {
    mesh = import_native(fresh);
  } else if (first.rfind("$MeshFormat", 0) == 0) {
    mesh = import_gmsh(fresh);
  } else {
    throw std::runtime_error(path + ": unrecognized mesh format (expected 'tetmesh 1' or Gmsh 2.x)");
  }
  fix_orientation_and_validate(mesh, path);
  return mesh;
}

void write_mesh(const TetMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "tetmesh 1\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  char buf[96];
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out << buf;
  }
  out << "tets " << mesh.num_tets() << "\n";
  for (const auto& T : mesh.tets) out << T[0] << " " << T[1] << " " << T[2] << " " << T[3] << "\n";
  for (size_t region = 0; region < mesh.region_names.size(); ++region) {
    std::vector<const BoundaryFace*> faces;
    for (const auto& bf : mesh.boundary_faces)
      if (bf.region == static_cast<int>(region)) faces.push_back(&bf);
    if (faces.empty()) continue;
    out << "faces " << faces.size() << " " << mesh.region_names[region] << "\n";
    for (const auto* bf : faces) out << bf->v[0] << " " << bf->v[1] << " " << bf->v[2] << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace lcfem
