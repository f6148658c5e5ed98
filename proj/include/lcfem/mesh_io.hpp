#pragma once

#include <string>

#include "lcfem/mesh.hpp"

namespace lcfem {

/// Reads a mesh from disk. Two ASCII formats are recognized by their first
/// line: the native "tetmesh 1" format (see write_mesh) and Gmsh v2.2
/// ($MeshFormat), restricted to linear tets and triangles. Negatively
/// oriented tets are repaired by a vertex swap; structural problems raise
/// std::runtime_error with the offending line where applicable.
TetMesh import_mesh(const std::string& path);

/// Writes the native format:
///   tetmesh 1
///   vertices N        followed by N lines "x y z"
///   tets M            followed by M lines "i j k l"
///   faces K <region>  one block per region, K lines "i j k"
/// All indices are 0-based. Vertex coordinates round-trip exactly.
void write_mesh(const TetMesh& mesh, const std::string& path);

}  // namespace lcfem
