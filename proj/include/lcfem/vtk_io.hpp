#pragma once

#include <string>

#include "lcfem/fem.hpp"

namespace lcfem {

/// Legacy ASCII VTK unstructured grid (cell type 10): mesh, the director as
/// point-data vectors, and |n|^2 - 1 as a point-data scalar.
void write_vtk(const TetMesh& mesh, const DirectorField& director, const std::string& path);

}  // namespace lcfem
