#include "lcfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lcfem {

Vec3 DirectorField::value_in_tet(int t, const std::array<double, 4>& bary) const {
  const auto& T = mesh->tets[t];
  Vec3 v{0, 0, 0};
  for (int k = 0; k < 4; ++k) v += bary[k] * values[T[k]];
  return v;
}

DofMap make_dof_map(const TetMesh& mesh, const BoundaryClassification& bc) {
  DofMap dofs;
  dofs.vertex_to_interior.assign(mesh.num_vertices(), -1);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!bc.is_dirichlet[v]) {
      dofs.vertex_to_interior[v] = static_cast<int>(dofs.interior.size());
      dofs.interior.push_back(v);
    }
  }
  return dofs;
}

DirectorField interpolate(const std::function<Vec3(const Vec3&)>& f, const TetMesh& mesh) {
  DirectorField field(mesh);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3 val = f(mesh.vertices[v]);
    if (!finite(val))
      throw std::invalid_argument("interpolate: non-finite value at vertex " + std::to_string(v));
    field.values[v] = val;
  }
  return field;
}

namespace {

ElementGeometry element_geometry(const TetMesh& mesh, const std::array<int, 4>& T) {
  const Vec3& a = mesh.vertices[T[0]];
  const Vec3 e1 = mesh.vertices[T[1]] - a;
  const Vec3 e2 = mesh.vertices[T[2]] - a;
  const Vec3 e3 = mesh.vertices[T[3]] - a;
  const double det = dot(e1, cross(e2, e3));

  ElementGeometry g;
  g.volume = det / 6.0;
  // Rows of the inverse edge matrix are the barycentric gradients 1..3.
  g.grad[1] = cross(e2, e3) / det;
  g.grad[2] = cross(e3, e1) / det;
  g.grad[3] = cross(e1, e2) / det;
  g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
  return g;
}

}  // namespace

P1Space::P1Space(const TetMesh& m) : mesh(&m) {
  elements.reserve(m.num_tets());
  for (const auto& T : m.tets) elements.push_back(element_geometry(m, T));
  lumped_weights.assign(m.num_vertices(), 0.0);
  for (int t = 0; t < m.num_tets(); ++t)
    for (int v : m.tets[t]) lumped_weights[v] += 0.25 * elements[t].volume;
}

std::vector<double> lumped_mass_weights(const TetMesh& mesh) {
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const double quarter = 0.25 * mesh.tet_volume(t);
    for (int v : mesh.tets[t]) w[v] += quarter;
  }
  return w;
}

ElementDerivatives element_derivatives(const DirectorField& field, const ElementGeometry& geom,
                                       const std::array<int, 4>& tet) {
  ElementDerivatives d;
  for (int k = 0; k < 4; ++k) {
    const Vec3& n = field.values[tet[k]];
    const Vec3& g = geom.grad[k];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d.grad(i, j) += n[i] * g[j];
  }
  d.div = d.grad.trace();
  d.curl = {d.grad(2, 1) - d.grad(1, 2), d.grad(0, 2) - d.grad(2, 0), d.grad(1, 0) - d.grad(0, 1)};
  return d;
}

const std::vector<QuadPoint>& quadrature_rule(int degree) {
  // Degree 2: symmetric 4-point rule.
  static const std::vector<QuadPoint> deg2 = [] {
    const double a = 0.58541019662496845446;  // (5 + 3 sqrt 5) / 20
    const double b = 0.13819660112501051518;  // (5 - sqrt 5) / 20
    std::vector<QuadPoint> pts;
    for (int i = 0; i < 4; ++i) {
      QuadPoint q{{b, b, b, b}, 0.25};
      q.bary[i] = a;
      pts.push_back(q);
    }
    return pts;
  }();

  // Degree >= 4: symmetric 14-point rule (two vertex orbits and one edge orbit).
  static const std::vector<QuadPoint> deg4 = [] {
    std::vector<QuadPoint> pts;
    auto add_vertex_orbit = [&pts](double b, double w) {
      const double a = 1.0 - 3.0 * b;
      for (int i = 0; i < 4; ++i) {
        QuadPoint q{{b, b, b, b}, w};
        q.bary[i] = a;
        pts.push_back(q);
      }
    };
    auto add_edge_orbit = [&pts](double c, double w) {
      const double d = 0.5 - c;
      const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
      for (const auto& p : pairs) {
        QuadPoint q{{d, d, d, d}, w};
        q.bary[p[0]] = c;
        q.bary[p[1]] = c;
        pts.push_back(q);
      }
    };
    add_vertex_orbit(0.31088591926330060980, 0.11268792571801585080);
    add_vertex_orbit(0.09273525031089122640, 0.07349304311636194954);
    add_edge_orbit(0.04550370412564964949, 0.04254602077708146643);
    return pts;
  }();

  if (degree == 2) return deg2;
  if (degree == 4) return deg4;
  throw std::invalid_argument("quadrature_rule: supported degrees are 2 and 4");
}

const std::vector<TriQuadPoint>& triangle_quadrature_rule() {
  // 6-point degree-4 rule on the reference triangle.
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> pts;
    auto add_orbit = [&pts](double a, double w) {
      const double b = 1.0 - 2.0 * a;
      pts.push_back({{b, a, a}, w});
      pts.push_back({{a, b, a}, w});
      pts.push_back({{a, a, b}, w});
    };
    add_orbit(0.09157621350977074346, 0.10995174365532186764);
    add_orbit(0.44594849091596488632, 0.22338158967801146570);
    return pts;
  }();
  return rule;
}

namespace {

// Sorted unique scalar adjacency (interior-to-interior) from the tets.
std::vector<std::vector<int>> interior_adjacency(const TetMesh& mesh, const DofMap& dofs) {
  std::vector<std::vector<int>> adj(dofs.n_interior());
  for (const auto& T : mesh.tets) {
    for (int a = 0; a < 4; ++a) {
      const int ia = dofs.vertex_to_interior[T[a]];
      if (ia < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int ib = dofs.vertex_to_interior[T[b]];
        if (ib >= 0) adj[ia].push_back(ib);
      }
    }
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

}  // namespace

SparseSym assemble_stiffness(const P1Space& space, const DofMap& dofs) {
  const TetMesh& mesh = *space.mesh;
  SparseSym K = SparseSym::from_adjacency(interior_adjacency(mesh, dofs));
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& T = mesh.tets[t];
    const ElementGeometry& g = space.elements[t];
    for (int a = 0; a < 4; ++a) {
      const int ia = dofs.vertex_to_interior[T[a]];
      if (ia < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int ib = dofs.vertex_to_interior[T[b]];
        if (ib < 0) continue;
        K.add(ia, ib, g.volume * dot(g.grad[a], g.grad[b]));
      }
    }
  }
  return K;
}

SparseSym assemble_divdiv(const P1Space& space, const DofMap& dofs) {
  const TetMesh& mesh = *space.mesh;
  // 3x3 blocks on the scalar skeleton.
  const auto scalar_adj = interior_adjacency(mesh, dofs);
  std::vector<std::vector<int>> adj(3 * dofs.n_interior());
  for (int i = 0; i < dofs.n_interior(); ++i) {
    for (int c = 0; c < 3; ++c) {
      auto& row = adj[3 * i + c];
      row.reserve(3 * scalar_adj[i].size());
      for (int j : scalar_adj[i])
        for (int d = 0; d < 3; ++d) row.push_back(3 * j + d);
    }
  }
  SparseSym D = SparseSym::from_adjacency(std::move(adj));
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& T = mesh.tets[t];
    const ElementGeometry& g = space.elements[t];
    // div(phi_a e_c) = d phi_a / d x_c, constant on the element.
    for (int a = 0; a < 4; ++a) {
      const int ia = dofs.vertex_to_interior[T[a]];
      if (ia < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int ib = dofs.vertex_to_interior[T[b]];
        if (ib < 0) continue;
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d)
            D.add(3 * ia + c, 3 * ib + d, g.volume * g.grad[a][c] * g.grad[b][d]);
      }
    }
  }
  return D;
}

double grad_norm_sq(const P1Space& space, const DirectorField& field) {
  const TetMesh& mesh = *space.mesh;
  double total = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const ElementDerivatives d = element_derivatives(field, space.elements[t], mesh.tets[t]);
    total += space.elements[t].volume * d.grad.frobenius_sq();
  }
  return total;
}

}  // namespace lcfem
