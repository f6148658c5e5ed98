#pragma once

#include <array>
#include <functional>
#include <vector>

#include "lcfem/linalg.hpp"
#include "lcfem/mesh.hpp"

namespace lcfem {

/// Per-element data of the P1 space: tet volume and the (constant) gradients
/// of the four barycentric basis functions. The four gradients sum to zero.
struct ElementGeometry {
  double volume = 0.0;
  std::array<Vec3, 4> grad;
};

/// Continuous piecewise-linear vector field given by nodal 3-vectors.
struct DirectorField {
  const TetMesh* mesh = nullptr;
  std::vector<Vec3> values;

  DirectorField() = default;
  explicit DirectorField(const TetMesh& m) : mesh(&m), values(m.num_vertices()) {}

  /// Barycentric-linear evaluation inside tet t.
  Vec3 value_in_tet(int t, const std::array<double, 4>& bary) const;
};

/// Continuous piecewise-linear scalar field.
struct ScalarField {
  const TetMesh* mesh = nullptr;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TetMesh& m) : mesh(&m), values(m.num_vertices(), 0.0) {}
};

/// Interior/Dirichlet splitting of the vertex set. Vector unknowns are
/// stacked per interior vertex (3 components each); the multiplier space has
/// one unknown per interior vertex.
struct DofMap {
  std::vector<int> interior;            // vertex ids
  std::vector<int> vertex_to_interior;  // -1 for Dirichlet vertices

  int n_interior() const { return static_cast<int>(interior.size()); }
};

DofMap make_dof_map(const TetMesh& mesh, const BoundaryClassification& bc);

/// Nodal (Lagrange) interpolation. Throws std::invalid_argument naming the
/// vertex if f produces a non-finite value there.
DirectorField interpolate(const std::function<Vec3(const Vec3&)>& f, const TetMesh& mesh);

/// Constant-per-element first derivatives of a P1 field on one tet:
/// grad(i,j) = d n_i / d x_j, div = tr(grad), curl from the antisymmetric part.
struct ElementDerivatives {
  Mat3 grad;
  double div = 0.0;
  Vec3 curl;
};

ElementDerivatives element_derivatives(const DirectorField& field, const ElementGeometry& geom,
                                       const std::array<int, 4>& tet);

/// Quadrature rule on the reference tet in barycentric coordinates; weights
/// sum to one and scale with the element volume. Supported degrees: 2, 4.
struct QuadPoint {
  std::array<double, 4> bary;
  double weight;
};
const std::vector<QuadPoint>& quadrature_rule(int degree);

/// Quadrature rule on the reference triangle (degree 4), used for boundary
/// face integrals.
struct TriQuadPoint {
  std::array<double, 3> bary;
  double weight;
};
const std::vector<TriQuadPoint>& triangle_quadrature_rule();

/// Precomputed element geometry plus the lumped nodal weights
/// w(z) = sum_{T contains z} |T| / 4.
struct P1Space {
  const TetMesh* mesh = nullptr;
  std::vector<ElementGeometry> elements;
  std::vector<double> lumped_weights;

  P1Space() = default;
  explicit P1Space(const TetMesh& m);
};

/// w(z) = (1/4) sum of incident tet volumes; the weights sum to the mesh
/// volume and integrate P1 functions exactly.
std::vector<double> lumped_mass_weights(const TetMesh& mesh);

/// Scalar stiffness matrix (grad phi_i, grad phi_j) on interior vertices.
/// Vector fields use it blockwise per component.
SparseSym assemble_stiffness(const P1Space& space, const DofMap& dofs);

/// (div u, div v) on stacked interior vector unknowns (3 per vertex,
/// component-major within each vertex). Couples components.
SparseSym assemble_divdiv(const P1Space& space, const DofMap& dofs);

/// Full-field Dirichlet seminorm  int |grad v|^2  by element sweep.
double grad_norm_sq(const P1Space& space, const DirectorField& field);

}  // namespace lcfem
