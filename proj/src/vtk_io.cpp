#include "lcfem/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lcfem {

void write_vtk(const TetMesh& mesh, const DirectorField& director, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  char buf[128];

  out << "# vtk DataFile Version 3.0\n";
  out << "director field\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    out << buf;
  }
  out << "CELLS " << mesh.num_tets() << " " << 5 * mesh.num_tets() << "\n";
  for (const auto& T : mesh.tets)
    out << "4 " << T[0] << " " << T[1] << " " << T[2] << " " << T[3] << "\n";
  out << "CELL_TYPES " << mesh.num_tets() << "\n";
  for (int t = 0; t < mesh.num_tets(); ++t) out << "10\n";

  out << "POINT_DATA " << mesh.num_vertices() << "\n";
  out << "VECTORS director double\n";
  for (const auto& v : director.values) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", v.x, v.y, v.z);
    out << buf;
  }
  out << "SCALARS length_sq_defect double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (const auto& v : director.values) {
    std::snprintf(buf, sizeof(buf), "%.9g\n", norm_sq(v) - 1.0);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace lcfem
