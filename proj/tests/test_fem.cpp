#include <doctest.h>

#include <cmath>
#include <random>

#include <stdexcept>
#include "lcfem/fem.hpp"
#include "lcfem/mesh.hpp"

using namespace lcfem;

namespace {

TetMesh reference_tet_mesh() {
  TetMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.tets = {{0, 1, 2, 3}};
  m.region_names = {"wall"};
  m.boundary_faces = {{{1, 2, 3}, 0}, {{0, 3, 2}, 0}, {{0, 1, 3}, 0}, {{0, 2, 1}, 0}};
  m.update_mesh_size();
  return m;
}

DofMap all_interior(const TetMesh& m) { return make_dof_map(m, classify_boundary(m, {})); }

// Exact reference-tet integral of x^a y^b z^c.
double monomial_integral(int a, int b, int c) {
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
}

}  // namespace

TEST_CASE("interpolation reproduces affine fields everywhere") {
  const TetMesh m = build_box_mesh({0, 0, 0}, {1, 1, 1}, 2, 2, 2);
  auto f = [](const Vec3& p) {
    return Vec3{0.3 * p.x - 1.1 * p.y + 0.5, 2.0 * p.z + 0.25 * p.x, -p.x + p.y - p.z + 2.0};
  };
  const DirectorField field = interpolate(f, m);

  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < m.num_tets(); t += 3) {
    double b0 = u(gen), b1 = u(gen) * (1 - b0), b2 = u(gen) * (1 - b0 - b1);
    const std::array<double, 4> bary = {b0, b1, b2, 1 - b0 - b1 - b2};
    Vec3 p{0, 0, 0};
    for (int k = 0; k < 4; ++k) p += bary[k] * m.vertices[m.tets[t][k]];
    CHECK(norm(field.value_in_tet(t, bary) - f(p)) < 1e-12);
  }
}

TEST_CASE("interpolating the radial defect gives unit nodal values") {
  const TetMesh m = build_ball_mesh(1.0, 1);
  const DirectorField n = interpolate([](const Vec3& p) { return p / norm(p); }, m);
  for (const Vec3& v : n.values) CHECK(std::abs(norm(v) - 1.0) < 1e-14);
}

TEST_CASE("interpolating a constant keeps the constant") {
  const TetMesh m = build_box_mesh({0, 0, 0}, {1, 1, 1}, 1, 1, 1);
  const DirectorField n = interpolate([](const Vec3&) { return Vec3{0, 0, 1}; }, m);
  for (const Vec3& v : n.values) CHECK(norm(v - Vec3{0, 0, 1}) == 0.0);
}

TEST_CASE("interpolation reports the vertex with a bad value") {
  const TetMesh m = build_box_mesh({0, 0, 0}, {1, 1, 1}, 1, 1, 1);
  auto bad = [](const Vec3& p) {
    return p.x > 0.5 && p.y > 0.5 && p.z > 0.5 ? Vec3{std::nan(""), 0, 0} : Vec3{1, 0, 0};
  };
  CHECK_THROWS_WITH_AS(interpolate(bad, m), doctest::Contains("vertex"), std::invalid_argument);
}

TEST_CASE("per-element derivatives of simple fields") {
  const TetMesh m = reference_tet_mesh();
  const P1Space space(m);

  SUBCASE("shear field") {
    const DirectorField n = interpolate([](const Vec3& p) { return Vec3{p.y, 0, 0}; }, m);
    const auto d = element_derivatives(n, space.elements[0], m.tets[0]);
    CHECK(d.grad(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(d.grad.frobenius_sq() - 1.0) < 1e-14);  // single entry
    CHECK(std::abs(d.div) < 1e-14);
    CHECK(norm(d.curl - Vec3{0, 0, -1}) < 1e-14);
  }
  SUBCASE("constant field") {
    const DirectorField n = interpolate([](const Vec3&) { return Vec3{0.3, -0.2, 0.9}; }, m);
    const auto d = element_derivatives(n, space.elements[0], m.tets[0]);
    CHECK(d.grad.frobenius_sq() < 1e-28);
    CHECK(std::abs(d.div) < 1e-14);
    CHECK(norm(d.curl) < 1e-14);
  }
  SUBCASE("identity field") {
    const DirectorField n = interpolate([](const Vec3& p) { return p; }, m);
    const auto d = element_derivatives(n, space.elements[0], m.tets[0]);
    CHECK(d.div == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(norm(d.curl) < 1e-14);
  }
}

TEST_CASE("barycentric gradients sum to zero and volumes are positive") {
  const TetMesh m = build_ball_mesh(1.0, 1);
  const P1Space space(m);
  for (const auto& g : space.elements) {
    CHECK(g.volume > 0.0);
    CHECK(norm(g.grad[0] + g.grad[1] + g.grad[2] + g.grad[3]) < 1e-12);
  }
}

TEST_CASE("quadrature rules integrate monomials exactly") {
  SUBCASE("weights sum to one") {
    for (int degree : {2, 4}) {
      double total = 0.0;
      for (const auto& q : quadrature_rule(degree)) total += q.weight;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("unsupported degree") { CHECK_THROWS_AS(quadrature_rule(3), std::invalid_argument); }

  // On the reference tet a quadrature point has x = bary[1], y = bary[2],
  // z = bary[3]; the reference volume is 1/6.
  auto integrate = [](int degree, int a, int b, int c) {
    double s = 0.0;
    for (const auto& q : quadrature_rule(degree))
      s += q.weight * std::pow(q.bary[1], a) * std::pow(q.bary[2], b) * std::pow(q.bary[3], c);
    return s / 6.0;
  };

  SUBCASE("degree 2 handles all quadratics") {
    CHECK(integrate(2, 2, 0, 0) == doctest::Approx(monomial_integral(2, 0, 0)).epsilon(1e-13));
    CHECK(integrate(2, 1, 1, 0) == doctest::Approx(monomial_integral(1, 1, 0)).epsilon(1e-13));
    CHECK(monomial_integral(2, 0, 0) == doctest::Approx(1.0 / 60.0));
    CHECK(monomial_integral(1, 1, 0) == doctest::Approx(1.0 / 120.0));
  }
  SUBCASE("degree 4 handles all quartics") {
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b)
        for (int c = 0; a + b + c <= 4; ++c)
          CHECK(integrate(4, a, b, c) ==
                doctest::Approx(monomial_integral(a, b, c)).epsilon(1e-12));
    CHECK(monomial_integral(4, 0, 0) == doctest::Approx(1.0 / 210.0));
  }
}

TEST_CASE("triangle rule integrates quartics on the reference triangle") {
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double s = 0.0;
      for (const auto& q : triangle_quadrature_rule())
        s += q.weight * std::pow(q.bary[1], a) * std::pow(q.bary[2], b);
      const double exact = fact(a) * fact(b) / fact(a + b + 2);
      CHECK(s / 2.0 == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("stiffness matrix annihilates constants before boundary restriction") {
  const TetMesh m = build_box_mesh({0, 0, 0}, {1, 1, 1}, 2, 2, 2);
  const P1Space space(m);
  const DofMap dofs = all_interior(m);
  const SparseSym K = assemble_stiffness(space, dofs);
  std::vector<double> ones(K.rows(), 1.0), out(K.rows());
  K.multiply(ones, out);
  for (double v : out) CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("single-element stiffness matches the hand computation") {
  const TetMesh m = reference_tet_mesh();
  const P1Space space(m);
  const DofMap dofs = all_interior(m);
  const SparseSym K = assemble_stiffness(space, dofs);
  // |T| grad_i . grad_j with grads (-1,-1,-1),(1,0,0),(0,1,0),(0,0,1), |T|=1/6
  const double expected[4][4] = {{0.5, -1. / 6, -1. / 6, -1. / 6},
                                 {-1. / 6, 1. / 6, 0, 0},
                                 {-1. / 6, 0, 1. / 6, 0},
                                 {-1. / 6, 0, 0, 1. / 6}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(K.entry(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-14));
  CHECK(K.value_symmetric(0.0));
}

TEST_CASE("div-div form vanishes on divergence-free fields") {
  const TetMesh m = build_box_mesh({0, 0, 0}, {1, 1, 1}, 2, 2, 2);
  const P1Space space(m);
  const DofMap dofs = all_interior(m);
  const SparseSym D = assemble_divdiv(space, dofs);

  const DirectorField shear = interpolate([](const Vec3& p) { return Vec3{p.y, 0, 0}; }, m);
  std::vector<double> x(3 * m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int c = 0; c < 3; ++c) x[3 * v + c] = shear.values[v][c];
  CHECK(std::abs(D.quadratic_form(x)) < 1e-13);

  const DirectorField radial = interpolate([](const Vec3& p) { return p; }, m);
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int c = 0; c < 3; ++c) x[3 * v + c] = radial.values[v][c];
  CHECK(D.quadratic_form(x) == doctest::Approx(9.0).epsilon(1e-13));  // div = 3, volume 1
}

TEST_CASE("stiffness and div-div forms are positive semidefinite") {
  const TetMesh m = build_ball_mesh(1.0, 0);
  const P1Space space(m);
  const DofMap dofs = all_interior(m);
  const SparseSym K = assemble_stiffness(space, dofs);
  const SparseSym D = assemble_divdiv(space, dofs);
  CHECK(K.value_symmetric(1e-14));
  CHECK(D.value_symmetric(1e-14));

  std::mt19937 gen(11);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xk(K.rows()), xd(D.rows());
    for (double& v : xk) v = dist(gen);
    for (double& v : xd) v = dist(gen);
    CHECK(K.quadratic_form(xk) > -1e-10);
    CHECK(D.quadratic_form(xd) > -1e-10);
  }
}

TEST_CASE("lumped weights partition the volume") {
  SUBCASE("sum equals the mesh volume") {
    const TetMesh m = build_ball_mesh(1.0, 1);
    const auto w = lumped_mass_weights(m);
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(total == doctest::Approx(m.total_volume()).epsilon(1e-12));
  }
  SUBCASE("single tet gives a quarter to each vertex") {
    const TetMesh m = reference_tet_mesh();
    const auto w = lumped_mass_weights(m);
    for (double v : w) CHECK(v == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  }
  SUBCASE("nodal quadrature integrates P1 functions exactly") {
    const TetMesh m = build_box_mesh({0, 0, 0}, {2, 1, 1}, 3, 2, 2);
    const auto w = lumped_mass_weights(m);
    double quad = 0.0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      const Vec3& p = m.vertices[v];
      quad += w[v] * (2 * p.x - 3 * p.y + p.z + 1);
    }
    // volume 2; coordinate means 1, 1/2, 1/2: 2 (2 - 3/2 + 1/2 + 1) = 4
    CHECK(quad == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("pointwise gradient identities hold for random fields") {
  std::mt19937 gen(42);
  std::normal_distribution<double> dist;
  std::uniform_real_distribution<double> coord(-1.0, 1.0);

  for (int trial = 0; trial < 100; ++trial) {
    TetMesh m;
    do {
      m.vertices = {{coord(gen), coord(gen), coord(gen)},
                    {coord(gen), coord(gen), coord(gen)},
                    {coord(gen), coord(gen), coord(gen)},
                    {coord(gen), coord(gen), coord(gen)}};
      m.tets = {{0, 1, 2, 3}};
      if (m.tet_volume(0) < 0) std::swap(m.tets[0][2], m.tets[0][3]);
    } while (m.tet_volume(0) < 1e-3);
    m.update_mesh_size();
    const P1Space space(m);

    DirectorField n(m);
    for (auto& v : n.values) v = {dist(gen), dist(gen), dist(gen)};
    const auto d = element_derivatives(n, space.elements[0], m.tets[0]);

    // |grad n|^2 = tr((grad n)^2) + |curl n|^2
    CHECK(std::abs(d.grad.frobenius_sq() - d.grad.trace_of_square() - norm_sq(d.curl)) <
          1e-12 * (1.0 + d.grad.frobenius_sq()));

    // (n.curl n)^2 + |n x curl n|^2 = |n|^2 |curl n|^2 pointwise
    for (const auto& q : quadrature_rule(2)) {
      const Vec3 nq = n.value_in_tet(0, q.bary);
      const double lhs = std::pow(dot(nq, d.curl), 2) + norm_sq(cross(nq, d.curl));
      const double rhs = norm_sq(nq) * norm_sq(d.curl);
      CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + rhs));
    }
  }
}

TEST_CASE("gradient seminorm of a shear field") {
  const TetMesh m = build_box_mesh({0, 0, 0}, {1, 1, 1}, 3, 3, 3);
  const P1Space space(m);
  const DirectorField n = interpolate([](const Vec3& p) { return Vec3{p.y, 0, 0}; }, m);
  CHECK(grad_norm_sq(space, n) == doctest::Approx(1.0).epsilon(1e-13));
}
