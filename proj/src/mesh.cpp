#include "lcfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace lcfem {

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(b - a, cross(c - a, d - a)) / 6.0;
}

int TetMesh::region_id(const std::string& name) const {
  for (size_t i = 0; i < region_names.size(); ++i)
    if (region_names[i] == name) return static_cast<int>(i);
  return -1;
}

double TetMesh::tet_volume(int t) const {
  const auto& T = tets[t];
  return tet_signed_volume(vertices[T[0]], vertices[T[1]], vertices[T[2]], vertices[T[3]]);
}

double TetMesh::total_volume() const {
  double v = 0.0;
  for (int t = 0; t < num_tets(); ++t) v += tet_volume(t);
  return v;
}

double TetMesh::tet_diameter(int t) const {
  const auto& T = tets[t];
  double d2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      d2 = std::max(d2, norm_sq(vertices[T[i]] - vertices[T[j]]));
  return std::sqrt(d2);
}

void TetMesh::update_mesh_size() {
  h = 0.0;
  for (int t = 0; t < num_tets(); ++t) h = std::max(h, tet_diameter(t));
}

namespace {

std::array<int, 3> sorted_face(int a, int b, int c) {
  std::array<int, 3> f = {a, b, c};
  std::sort(f.begin(), f.end());
  return f;
}

// The four faces of a tet, opposite each vertex.
constexpr int kTetFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

}  // namespace

void TetMesh::validate() const {
  const int nv = num_vertices();
  for (int t = 0; t < num_tets(); ++t) {
    for (int k = 0; k < 4; ++k) {
      if (tets[t][k] < 0 || tets[t][k] >= nv)
        throw std::runtime_error("tet " + std::to_string(t) + ": vertex index out of range");
    }
    if (tet_volume(t) <= 0.0)
      throw std::runtime_error("tet " + std::to_string(t) + ": non-positive volume");
  }

  // Conformity: any face may be shared by at most two tets.
  std::map<std::array<int, 3>, int> face_count;
  for (const auto& T : tets) {
    for (const auto& f : kTetFaces) {
      auto key = sorted_face(T[f[0]], T[f[1]], T[f[2]]);
      if (++face_count[key] > 2)
        throw std::runtime_error("mesh is non-conforming: face shared by more than two tets");
    }
  }

  for (size_t i = 0; i < boundary_faces.size(); ++i) {
    const auto& bf = boundary_faces[i];
    for (int k = 0; k < 3; ++k) {
      if (bf.v[k] < 0 || bf.v[k] >= nv)
        throw std::runtime_error("boundary face " + std::to_string(i) + ": vertex index out of range");
    }
    auto it = face_count.find(sorted_face(bf.v[0], bf.v[1], bf.v[2]));
    if (it == face_count.end() || it->second != 1)
      throw std::runtime_error("boundary face " + std::to_string(i) +
                               ": does not belong to exactly one tet");
    if (bf.region < 0 || bf.region >= static_cast<int>(region_names.size()))
      throw std::runtime_error("boundary face " + std::to_string(i) + ": unknown region id");
  }
}

namespace {

// Appends the 6-tet split of one grid cell; corner(i,j,k) gives the global
// vertex index. Orientation is fixed by swapping when the signed volume of a
// candidate comes out negative.
template <typename Corner>
void append_cell_tets(std::vector<std::array<int, 4>>& tets, const std::vector<Vec3>& verts,
                      Corner corner) {
  const int c000 = corner(0, 0, 0), c100 = corner(1, 0, 0), c010 = corner(0, 1, 0),
            c110 = corner(1, 1, 0), c001 = corner(0, 0, 1), c101 = corner(1, 0, 1),
            c011 = corner(0, 1, 1), c111 = corner(1, 1, 1);
  // Six tets around the main diagonal c000-c111, one per coordinate order.
  const std::array<std::array<int, 4>, 6> split = {{
      {c000, c100, c110, c111},
      {c000, c100, c101, c111},
      {c000, c010, c110, c111},
      {c000, c010, c011, c111},
      {c000, c001, c101, c111},
      {c000, c001, c011, c111},
  }};
  for (auto T : split) {
    if (tet_signed_volume(verts[T[0]], verts[T[1]], verts[T[2]], verts[T[3]]) < 0.0)
      std::swap(T[2], T[3]);
    tets.push_back(T);
  }
}

struct GridMesh {
  TetMesh mesh;
  int nx, ny, nz;
  // vertex index of grid node
  int vid(int i, int j, int k) const { return (k * (ny + 1) + j) * (nx + 1) + i; }
};

GridMesh build_grid(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
  GridMesh g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  TetMesh& m = g.mesh;
  m.vertices.reserve((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.vertices.push_back({lo.x + (hi.x - lo.x) * i / nx, lo.y + (hi.y - lo.y) * j / ny,
                              lo.z + (hi.z - lo.z) * k / nz});
  m.tets.reserve(6 * nx * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        append_cell_tets(m.tets, m.vertices,
                         [&](int a, int b, int c) { return g.vid(i + a, j + b, k + c); });
  return g;
}

// Two triangles per grid face, consistent with the 6-tet cell split: the
// split of every cell face contains the diagonal through the cell's low and
// high corners, so faces between neighboring cells match up.
void add_box_boundary_faces(GridMesh& g) {
  TetMesh& m = g.mesh;
  m.region_names = {"left", "right", "front", "back", "bottom", "top"};
  auto add_quad = [&m](int region, int a, int b, int c, int d) {
    // quad vertices a,b,c,d in cyclic order; diagonal a-c
    m.boundary_faces.push_back({{a, b, c}, region});
    m.boundary_faces.push_back({{a, c, d}, region});
  };
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j) {
      add_quad(0, g.vid(0, j, k), g.vid(0, j + 1, k), g.vid(0, j + 1, k + 1), g.vid(0, j, k + 1));
      add_quad(1, g.vid(g.nx, j, k), g.vid(g.nx, j + 1, k), g.vid(g.nx, j + 1, k + 1),
               g.vid(g.nx, j, k + 1));
    }
  for (int k = 0; k < g.nz; ++k)
    for (int i = 0; i < g.nx; ++i) {
      add_quad(2, g.vid(i, 0, k), g.vid(i + 1, 0, k), g.vid(i + 1, 0, k + 1), g.vid(i, 0, k + 1));
      add_quad(3, g.vid(i, g.ny, k), g.vid(i + 1, g.ny, k), g.vid(i + 1, g.ny, k + 1),
               g.vid(i, g.ny, k + 1));
    }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      add_quad(4, g.vid(i, j, 0), g.vid(i + 1, j, 0), g.vid(i + 1, j + 1, 0), g.vid(i, j + 1, 0));
      add_quad(5, g.vid(i, j, g.nz), g.vid(i + 1, j, g.nz), g.vid(i + 1, j + 1, g.nz),
               g.vid(i, j + 1, g.nz));
    }
}

// Rebuilds the boundary-face list so that every face triple matches a tet
// face (needed after vertex projection or tet removal does not change
// connectivity, but generated quads may not align with the cell split near
// modified regions). Faces are matched by vertex set.
void align_boundary_faces(TetMesh& m) {
  std::map<std::array<int, 3>, int> face_count;
  for (const auto& T : m.tets)
    for (const auto& f : kTetFaces) ++face_count[sorted_face(T[f[0]], T[f[1]], T[f[2]])];
  std::vector<BoundaryFace> kept;
  for (const auto& bf : m.boundary_faces) {
    auto it = face_count.find(sorted_face(bf.v[0], bf.v[1], bf.v[2]));
    if (it != face_count.end() && it->second == 1) kept.push_back(bf);
  }
  m.boundary_faces = std::move(kept);
}

}  // namespace

TetMesh build_box_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("build_box_mesh: cell counts must be at least 1");
  if (!(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z))
    throw std::invalid_argument("build_box_mesh: box is degenerate (need hi > lo)");
  GridMesh g = build_grid(lo, hi, nx, ny, nz);
  add_box_boundary_faces(g);
  g.mesh.update_mesh_size();
  return std::move(g.mesh);
}

TetMesh build_ball_mesh(double radius, int refinement) {
  if (refinement < 0) throw std::invalid_argument("build_ball_mesh: refinement must be >= 0");
  if (radius <= 0.0) throw std::invalid_argument("build_ball_mesh: radius must be positive");
  const int n = 2 * refinement + 3;  // odd: the grid has no vertex at the center

  // Interior vertices get a deterministic general-position perturbation.
  // A perfectly symmetric grid sits on symmetric saddle manifolds of the
  // director energies and can stall spontaneous symmetry breaking that
  // generic (unstructured) meshes exhibit.
  for (double jitter = 0.15; ; jitter *= 0.5) {
    GridMesh g = build_grid({-radius, -radius, -radius}, {radius, radius, radius}, n, n, n);
    TetMesh& m = g.mesh;
    if (jitter > 1e-3) {
      std::mt19937 rng(20240517u + static_cast<unsigned>(n));
      std::uniform_real_distribution<double> u(-jitter, jitter);
      const double cell = 2.0 * radius / n;
      for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
          for (int i = 0; i <= n; ++i) {
            const Vec3 d{u(rng) * cell, u(rng) * cell, u(rng) * cell};
            if (i > 0 && i < n && j > 0 && j < n && k > 0 && k < n) m.vertices[g.vid(i, j, k)] += d;
          }
    }
    // Cube shell |p|_inf = s maps onto the sphere of radius s.
    for (auto& p : m.vertices) {
      const double e = norm(p);
      if (e > 0.0) p *= inf_norm(p) / e;
    }
    bool valid = true;
    for (int t = 0; t < m.num_tets() && valid; ++t) valid = m.tet_volume(t) > 0.0;
    if (!valid) {
      if (jitter <= 1e-3)
        throw std::runtime_error("build_ball_mesh: degenerate element after spherical mapping");
      continue;  // retry with half the perturbation
    }

    add_box_boundary_faces(g);
    for (auto& bf : m.boundary_faces) bf.region = 0;
    m.region_names = {"sphere"};
    m.update_mesh_size();
    return std::move(g.mesh);
  }
}

namespace {

// Closest point on triangle (a,b,c) to p. Standard barycentric region test.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

bool point_in_tet(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  // Positive orientation assumed; p is inside iff all face-opposing volumes
  // are nonnegative.
  return tet_signed_volume(p, b, c, d) >= 0.0 && tet_signed_volume(a, p, c, d) >= 0.0 &&
         tet_signed_volume(a, b, p, d) >= 0.0 && tet_signed_volume(a, b, c, p) >= 0.0;
}

double distance_to_tet(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  if (point_in_tet(p, a, b, c, d)) return 0.0;
  double best = norm(p - closest_point_on_triangle(p, b, c, d));
  best = std::min(best, norm(p - closest_point_on_triangle(p, a, c, d)));
  best = std::min(best, norm(p - closest_point_on_triangle(p, a, b, d)));
  best = std::min(best, norm(p - closest_point_on_triangle(p, a, b, c)));
  return best;
}

}  // namespace

TetMesh build_colloid_mesh(double outer_half_width, double hole_radius, int refinement) {
  if (refinement < 0) throw std::invalid_argument("build_colloid_mesh: refinement must be >= 0");
  if (!(hole_radius > 0.0 && hole_radius < outer_half_width))
    throw std::invalid_argument("build_colloid_mesh: need 0 < hole_radius < outer_half_width");

  const int n = 4 << refinement;
  const double w = outer_half_width;
  if (hole_radius < 2.0 * w / n)
    throw std::invalid_argument(
        "build_colloid_mesh: refinement too coarse to resolve the hole (hole smaller than a cell)");
  GridMesh g = build_grid({-w, -w, -w}, {w, w, w}, n, n, n);
  add_box_boundary_faces(g);
  TetMesh& box = g.mesh;

  // Keep tets at positive distance from the ball.
  const Vec3 origin{0, 0, 0};
  std::vector<char> keep(box.num_tets(), 0);
  int removed = 0;
  for (int t = 0; t < box.num_tets(); ++t) {
    const auto& T = box.tets[t];
    const double dist = distance_to_tet(origin, box.vertices[T[0]], box.vertices[T[1]],
                                        box.vertices[T[2]], box.vertices[T[3]]);
    keep[t] = dist >= hole_radius ? 1 : 0;
    removed += keep[t] ? 0 : 1;
  }
  if (removed == 0)
    throw std::invalid_argument("build_colloid_mesh: refinement too coarse to resolve the hole");

  // Peel kept tets whose four vertices all lie on the exposed surface: the
  // later projection would flatten them (no free vertex to give way).
  std::vector<char> on_hole(box.num_vertices(), 0);
  for (bool changed = true; changed;) {
    std::fill(on_hole.begin(), on_hole.end(), 0);
    std::map<std::array<int, 3>, std::array<int, 2>> interface_count;
    for (int t = 0; t < box.num_tets(); ++t) {
      const auto& T = box.tets[t];
      for (const auto& f : kTetFaces)
        ++interface_count[sorted_face(T[f[0]], T[f[1]], T[f[2]])][keep[t] ? 0 : 1];
    }
    for (const auto& [face, cnt] : interface_count) {
      if (cnt[0] == 1 && cnt[1] == 1)
        for (int v : face) on_hole[v] = 1;
    }
    changed = false;
    for (int t = 0; t < box.num_tets(); ++t) {
      if (!keep[t]) continue;
      const auto& T = box.tets[t];
      if (on_hole[T[0]] && on_hole[T[1]] && on_hole[T[2]] && on_hole[T[3]]) {
        keep[t] = 0;
        changed = true;
      }
    }
  }

  // Faces between kept and removed tets form the hole boundary.
  std::map<std::array<int, 3>, std::array<int, 2>> face_tets;  // kept count, removed count
  for (int t = 0; t < box.num_tets(); ++t) {
    const auto& T = box.tets[t];
    for (const auto& f : kTetFaces) {
      auto& cnt = face_tets[sorted_face(T[f[0]], T[f[1]], T[f[2]])];
      ++cnt[keep[t] ? 0 : 1];
    }
  }

  TetMesh out;
  out.region_names = {"sphere", "outer"};
  std::vector<int> remap(box.num_vertices(), -1);
  auto map_vertex = [&](int v) {
    if (remap[v] < 0) {
      remap[v] = out.num_vertices();
      out.vertices.push_back(box.vertices[v]);
    }
    return remap[v];
  };
  for (int t = 0; t < box.num_tets(); ++t) {
    if (!keep[t]) continue;
    std::array<int, 4> T;
    for (int k = 0; k < 4; ++k) T[k] = map_vertex(box.tets[t][k]);
    out.tets.push_back(T);
  }

  std::set<int> hole_vertices;
  for (const auto& [face, cnt] : face_tets) {
    if (cnt[0] == 1 && cnt[1] == 1) {
      out.boundary_faces.push_back({{remap[face[0]], remap[face[1]], remap[face[2]]}, 0});
      for (int v : face) hole_vertices.insert(remap[v]);
    }
  }
  if (out.boundary_faces.empty())
    throw std::invalid_argument("build_colloid_mesh: refinement too coarse to resolve the hole");
  for (const auto& bf : box.boundary_faces) {
    if (remap[bf.v[0]] >= 0 && remap[bf.v[1]] >= 0 && remap[bf.v[2]] >= 0)
      out.boundary_faces.push_back({{remap[bf.v[0]], remap[bf.v[1]], remap[bf.v[2]]}, 1});
  }

  // Pull the exposed vertices onto the sphere.
  for (int v : hole_vertices) out.vertices[v] *= hole_radius / norm(out.vertices[v]);

  // Projecting a staircase onto the sphere can flatten elements next to the
  // hole; damped Laplacian sweeps over the movable vertices untangle them.
  // Sphere and outer-box vertices stay fixed, so neither boundary moves and
  // the enclosed volume is unchanged.
  {
    std::vector<char> movable(out.num_vertices(), 1);
    for (int v : hole_vertices) movable[v] = 0;
    for (const auto& bf : out.boundary_faces)
      if (bf.region == 1)
        for (int v : bf.v) movable[v] = 0;

    std::vector<std::set<int>> neighbors(out.num_vertices());
    for (const auto& T : out.tets)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (a != b) neighbors[T[a]].insert(T[b]);

    auto min_volume = [&out]() {
      double m = 1e300;
      for (int t = 0; t < out.num_tets(); ++t) m = std::min(m, out.tet_volume(t));
      return m;
    };

    const double cell = 2.0 * w / n;
    const double vol_floor = 1e-6 * cell * cell * cell;
    for (int sweep = 0; sweep < 80 && min_volume() <= vol_floor; ++sweep) {
      for (int v = 0; v < out.num_vertices(); ++v) {
        if (!movable[v] || neighbors[v].empty()) continue;
        Vec3 centroid{0, 0, 0};
        for (int u : neighbors[v]) centroid += out.vertices[u];
        centroid *= 1.0 / static_cast<double>(neighbors[v].size());
        Vec3 next = out.vertices[v] + 0.5 * (centroid - out.vertices[v]);
        const double d = norm(next);
        if (d < hole_radius) next *= hole_radius / d;  // never enter the hole
        out.vertices[v] = next;
      }
    }
    if (min_volume() <= 0.0)
      throw std::invalid_argument(
          "build_colloid_mesh: refinement too coarse to resolve the hole (projection "
          "degenerates an element)");
  }
  align_boundary_faces(out);
  out.update_mesh_size();
  return out;
}

BoundaryClassification classify_boundary(const TetMesh& mesh,
                                         const std::vector<std::string>& dirichlet_regions) {
  std::vector<char> selected(mesh.region_names.size(), 0);
  for (const auto& name : dirichlet_regions) {
    const int id = mesh.region_id(name);
    if (id < 0) throw std::invalid_argument("classify_boundary: unknown region label '" + name + "'");
    selected[id] = 1;
  }
  BoundaryClassification bc;
  bc.is_dirichlet.assign(mesh.num_vertices(), 0);
  for (const auto& bf : mesh.boundary_faces) {
    if (selected[bf.region])
      for (int v : bf.v) bc.is_dirichlet[v] = 1;
  }
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (bc.is_dirichlet[v]) bc.dirichlet_nodes.push_back(v);
  return bc;
}

}  // namespace lcfem
