#include "lcfem/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcfem {

ModifiedConstants modified_constants(const FrankConstants& fc) {
  if (!(fc.k1 > 0.0) || !(fc.k2 > 0.0) || !(fc.k3 > 0.0))
    throw std::invalid_argument("modified_constants: elastic moduli must be positive");
  if (fc.chi_A < 0.0)
    throw std::invalid_argument("modified_constants: chi_A must be nonnegative");
  ModifiedConstants mc;
  mc.c0 = std::min({fc.k1, fc.k2, fc.k3});
  mc.c1 = fc.k1 - mc.c0;
  mc.c2 = fc.k2 - mc.c0;
  mc.c3 = fc.k3 - mc.c0;
  return mc;
}

namespace {

Vec3 bary_point(const TetMesh& mesh, const std::array<int, 4>& T,
                const std::array<double, 4>& bary) {
  Vec3 p{0, 0, 0};
  for (int k = 0; k < 4; ++k) p += bary[k] * mesh.vertices[T[k]];
  return p;
}

}  // namespace

EnergyBreakdown energy_terms(const P1Space& space, const DirectorField& n,
                             const ModifiedConstants& mc, double chi_A, const MagneticField& H) {
  const TetMesh& mesh = *space.mesh;
  const auto& quad = quadrature_rule(2);
  const auto& quad_mag = quadrature_rule(H.uniform ? 2 : 4);

  EnergyBreakdown out;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& T = mesh.tets[t];
    const ElementGeometry& g = space.elements[t];
    const ElementDerivatives d = element_derivatives(n, g, T);

    out.one_constant += 0.5 * mc.c0 * g.volume * d.grad.frobenius_sq();
    out.splay += g.volume * d.div * d.div;

    // (n . curl n)^2 and |n x curl n|^2 are quadratic on the element.
    double twist_t = 0.0, bend_t = 0.0;
    for (const auto& q : quad) {
      const Vec3 nq = n.value_in_tet(t, q.bary);
      const double tw = dot(nq, d.curl);
      twist_t += q.weight * tw * tw;
      bend_t += q.weight * norm_sq(cross(nq, d.curl));
    }
    out.twist += g.volume * twist_t;
    out.bend += g.volume * bend_t;

    if (chi_A != 0.0 && !H.zero()) {
      double mag_t = 0.0;
      for (const auto& q : quad_mag) {
        const Vec3 nq = n.value_in_tet(t, q.bary);
        const Vec3 Hq = H.eval(bary_point(mesh, T, q.bary));
        const double nh = dot(nq, Hq);
        mag_t += q.weight * nh * nh;
      }
      out.magnetic -= 0.5 * chi_A * g.volume * mag_t;
    }
  }
  out.splay_w = 0.5 * mc.c1 * out.splay;
  out.twist_w = 0.5 * mc.c2 * out.twist;
  out.bend_w = 0.5 * mc.c3 * out.bend;
  out.total = out.one_constant + out.splay_w + out.twist_w + out.bend_w + out.magnetic;
  return out;
}

EnergyBreakdown energy(const P1Space& space, const DirectorField& n, const FrankConstants& fc) {
  return energy_terms(space, n, modified_constants(fc), fc.chi_A, fc.field);
}

std::vector<double> first_variation_terms(const P1Space& space, const DirectorField& n,
                                          const ModifiedConstants& mc, double chi_A,
                                          const MagneticField& H, const DofMap& dofs) {
  const TetMesh& mesh = *space.mesh;
  const auto& quad = quadrature_rule(2);
  const auto& quad_mag = quadrature_rule(H.uniform ? 2 : 4);
  const bool magnetic = chi_A != 0.0 && !H.zero();

  std::vector<double> f(3 * dofs.n_interior(), 0.0);
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& T = mesh.tets[t];
    const ElementGeometry& g = space.elements[t];
    const ElementDerivatives d = element_derivatives(n, g, T);

    // Element-local samples reused across test functions.
    std::array<Vec3, 14> n_q, H_q;
    const auto& qm = magnetic ? quad_mag : quad;
    for (size_t q = 0; q < quad.size(); ++q) n_q[q] = n.value_in_tet(t, quad[q].bary);
    if (magnetic)
      for (size_t q = 0; q < qm.size(); ++q) H_q[q] = H.eval(bary_point(mesh, T, qm[q].bary));

    for (int a = 0; a < 4; ++a) {
      const int ia = dofs.vertex_to_interior[T[a]];
      if (ia < 0) continue;
      const Vec3& ga = g.grad[a];

      for (int c = 0; c < 3; ++c) {
        // Test function v = phi_a e_c: grad v rows are zero except row c.
        double value = 0.0;

        // c0 (grad n, grad v) = c0 |T| (grad n)_c . grad phi_a
        value += mc.c0 * g.volume *
                 (d.grad(c, 0) * ga.x + d.grad(c, 1) * ga.y + d.grad(c, 2) * ga.z);

        // c1 (div n, div v), div v = (grad phi_a)_c
        value += mc.c1 * g.volume * d.div * ga[c];

        // Quartic terms: curl v = grad phi_a x e_c is constant.
        if (mc.c2 != 0.0 || mc.c3 != 0.0) {
          const Vec3 curl_v = cross(ga, axes[c]);
          double tw = 0.0, bd = 0.0;
          for (size_t q = 0; q < quad.size(); ++q) {
            const double phi_a = quad[q].bary[a];
            const Vec3& nq = n_q[q];
            if (mc.c2 != 0.0)
              tw += quad[q].weight * dot(nq, d.curl) * (phi_a * d.curl[c] + dot(nq, curl_v));
            if (mc.c3 != 0.0) {
              const Vec3 vxw = phi_a * cross(axes[c], d.curl) + cross(nq, curl_v);
              bd += quad[q].weight * dot(cross(nq, d.curl), vxw);
            }
          }
          value += g.volume * (mc.c2 * tw + mc.c3 * bd);
        }

        // -chi_A (n.H, v.H)
        if (magnetic) {
          double mg = 0.0;
          for (size_t q = 0; q < qm.size(); ++q) {
            const Vec3 nq = magnetic && !H.uniform ? n.value_in_tet(t, qm[q].bary) : n_q[q];
            mg += qm[q].weight * dot(nq, H_q[q]) * qm[q].bary[a] * H_q[q][c];
          }
          value -= chi_A * g.volume * mg;
        }

        f[3 * ia + c] -= value;
      }
    }
  }
  return f;
}

std::vector<double> first_variation(const P1Space& space, const DirectorField& n,
                                    const FrankConstants& fc, const DofMap& dofs) {
  return first_variation_terms(space, n, modified_constants(fc), fc.chi_A, fc.field, dofs);
}

namespace {

// Integral of the positive part of the linear function with nodal values s
// over a tet of volume vol. Splits the tet along the zero level set.
double positive_part_integral(std::array<double, 4> s, const std::array<Vec3, 4>& x, double vol) {
  int pos = 0;
  for (double v : s) pos += v >= 0.0 ? 1 : 0;
  const double mean = 0.25 * (s[0] + s[1] + s[2] + s[3]);

  if (pos == 4) return vol * mean;
  if (pos == 0) return 0.0;

  // Bring the minority vertices to the front.
  std::array<int, 4> order = {0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const bool pa = s[a] >= 0.0, pb = s[b] >= 0.0;
    if (pa != pb) return (pos <= 2) ? (pa && !pb) : (!pa && pb);
    return a < b;
  });

  if (pos == 1 || pos == 3) {
    // order[0] is the apex of the cut corner (positive if pos==1, negative
    // if pos==3); the cut points sit at t_i = s0 / (s0 - s_i) along its edges.
    const int apex = order[0];
    double frac = 1.0;
    for (int k = 1; k < 4; ++k) {
      const int i = order[k];
      frac *= s[apex] / (s[apex] - s[i]);
    }
    const double corner = std::abs(frac) * vol * 0.25 * std::abs(s[apex]);
    return pos == 1 ? corner : vol * mean + corner;
  }

  // pos == 2: the positive region is a wedge with the two positive vertices
  // and four edge cut points. order[0],order[1] positive; order[2],order[3] negative.
  const int p0 = order[0], p1 = order[1], m0 = order[2], m1 = order[3];
  auto cut = [&](int p, int m) {
    const double t = s[p] / (s[p] - s[m]);
    return x[p] + t * (x[m] - x[p]);
  };
  const Vec3 a0 = x[p0], a1 = cut(p0, m0), a2 = cut(p0, m1);
  const Vec3 b0 = x[p1], b1 = cut(p1, m0), b2 = cut(p1, m1);
  const double va0 = s[p0], vb0 = s[p1];  // cut points carry value zero

  // Wedge (a0 a1 a2 | b0 b1 b2) split into three tets; the linear function's
  // integral over each is volume times the vertex-value mean.
  double integral = 0.0;
  auto add_tet = [&integral](const Vec3& q0, const Vec3& q1, const Vec3& q2, const Vec3& q3,
                             double f0, double f1, double f2, double f3) {
    const double v = std::abs(tet_signed_volume(q0, q1, q2, q3));
    integral += v * 0.25 * (f0 + f1 + f2 + f3);
  };
  add_tet(a0, a1, a2, b0, va0, 0, 0, vb0);
  add_tet(a1, a2, b0, b1, 0, 0, vb0, 0);
  add_tet(a2, b0, b1, b2, 0, vb0, 0, 0);
  return integral;
}

}  // namespace

double constraint_error(const P1Space& space, const DirectorField& n, double p) {
  const TetMesh& mesh = *space.mesh;
  std::vector<double> s(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) s[v] = norm_sq(n.values[v]) - 1.0;

  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 1.0) {
    // int |l| = 2 int l^+ - int l per element.
    double total = 0.0;
    for (int t = 0; t < mesh.num_tets(); ++t) {
      const auto& T = mesh.tets[t];
      const double vol = space.elements[t].volume;
      const std::array<double, 4> sv = {s[T[0]], s[T[1]], s[T[2]], s[T[3]]};
      const std::array<Vec3, 4> xv = {mesh.vertices[T[0]], mesh.vertices[T[1]],
                                      mesh.vertices[T[2]], mesh.vertices[T[3]]};
      const double mean = 0.25 * (sv[0] + sv[1] + sv[2] + sv[3]);
      total += 2.0 * positive_part_integral(sv, xv, vol) - vol * mean;
    }
    return total;
  }
  throw std::invalid_argument("constraint_error: supported norms are p = 1 and p = infinity");
}

double boundary_error(const P1Space& space, const DirectorField& n,
                      const std::function<Vec3(const Vec3&)>& g, const BoundaryClassification& bc) {
  const TetMesh& mesh = *space.mesh;
  const auto& quad = triangle_quadrature_rule();
  double total = 0.0;
  for (const auto& bf : mesh.boundary_faces) {
    if (!(bc.is_dirichlet[bf.v[0]] && bc.is_dirichlet[bf.v[1]] && bc.is_dirichlet[bf.v[2]]))
      continue;
    const Vec3& x0 = mesh.vertices[bf.v[0]];
    const Vec3& x1 = mesh.vertices[bf.v[1]];
    const Vec3& x2 = mesh.vertices[bf.v[2]];
    const double area = 0.5 * norm(cross(x1 - x0, x2 - x0));
    double face = 0.0;
    for (const auto& q : quad) {
      const Vec3 xq = q.bary[0] * x0 + q.bary[1] * x1 + q.bary[2] * x2;
      const Vec3 nq = q.bary[0] * n.values[bf.v[0]] + q.bary[1] * n.values[bf.v[1]] +
                      q.bary[2] * n.values[bf.v[2]];
      face += q.weight * norm_sq(nq - g(xq));
    }
    total += area * face;
  }
  return std::sqrt(total);
}

double helein_margin(const FrankConstants& fc) { return 8.0 * (fc.k2 - fc.k1) + fc.k3; }

double freedericksz_threshold(double k1, double chi_A, double w) {
  if (!(chi_A > 0.0))
    throw std::invalid_argument("freedericksz_threshold: chi_A must be positive");
  if (!(w > 0.0)) throw std::invalid_argument("freedericksz_threshold: cell width must be positive");
  if (!(k1 > 0.0)) throw std::invalid_argument("freedericksz_threshold: k1 must be positive");
  return std::sqrt(k1 / chi_A) / (2.0 * w);
}

}  // namespace lcfem
