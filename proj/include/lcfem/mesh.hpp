#pragma once

#include <array>
#include <string>
#include <vector>

#include "lcfem/vec3.hpp"

namespace lcfem {

struct BoundaryFace {
  std::array<int, 3> v;
  int region = -1;  // index into TetMesh::region_names
};

/// Conforming tetrahedral mesh. Tets are positively oriented; `h` is the
/// maximum tet diameter (longest edge over all tets).
struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<std::string> region_names;
  double h = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }

  /// Index of a named boundary region, or -1 if absent.
  int region_id(const std::string& name) const;

  /// Signed volume of tet t (positive for a valid mesh).
  double tet_volume(int t) const;

  double total_volume() const;

  /// Longest edge of tet t.
  double tet_diameter(int t) const;

  /// Recompute h from the current vertex/tet arrays.
  void update_mesh_size();

  /// Checks positivity of volumes, conformity (each face shared by at most
  /// two tets), and that each stored boundary face matches exactly one tet.
  /// Throws std::runtime_error with a description on failure.
  void validate() const;
};

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Structured box mesh: nx*ny*nz cells, each split into 6 tets. The six box
/// sides carry the region labels "left","right","front","back","bottom","top"
/// (x-,x+,y-,y+,z-,z+).
TetMesh build_box_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz);

/// Ball mesh built from an odd-resolution structured grid of the bounding
/// cube whose vertices are repositioned radially so that nested cube shells
/// land on nested spheres; the outer shell lands exactly on the sphere.
/// refinement level l uses 2l+3 cells per side, so no vertex sits at the
/// center. Boundary region label: "sphere".
TetMesh build_ball_mesh(double radius, int refinement);

/// Box [-w,w]^3 with a spherical hole: tets intersecting the ball are
/// removed and the exposed vertices are projected onto the sphere.
/// refinement level l uses 4*2^l cells per side. Regions: "sphere" (hole)
/// and "outer" (all six box sides).
TetMesh build_colloid_mesh(double outer_half_width, double hole_radius, int refinement);

struct BoundaryClassification {
  std::vector<int> dirichlet_nodes;   // sorted, unique
  std::vector<char> is_dirichlet;     // size num_vertices
};

/// Vertices incident to at least one face in the listed regions.
/// Throws std::invalid_argument for labels the mesh does not carry.
BoundaryClassification classify_boundary(const TetMesh& mesh,
                                         const std::vector<std::string>& dirichlet_regions);

}  // namespace lcfem
