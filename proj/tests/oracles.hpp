#pragma once

// Reference solvers for the per-step saddle system, independent of the
// iterative path used in production. Dense; small systems only.

#include <Eigen/Dense>
#include <vector>

#include "lcfem/linalg.hpp"

namespace test_oracles {

struct SaddleSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd lambda;
};

// Materialize the operator column by column and factorize.
inline SaddleSolution dense_saddle_solve(const lcfem::SaddleOperator& op,
                                         const std::vector<double>& rhs) {
  const int nu = op.displacement_size();
  const int n = nu + op.multiplier_size();
  Eigen::MatrixXd S(n, n);
  std::vector<double> e(n, 0.0), col;
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    for (int i = 0; i < n; ++i) S(i, j) = col[i];
    e[j] = 0.0;
  }
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
  const Eigen::VectorXd x = S.fullPivLu().solve(b);
  return {x.head(nu), x.tail(n - nu)};
}

// Eliminate the constraint instead: expand the solution in per-node
// orthonormal bases of the planes orthogonal to the constraint rows and
// solve the reduced SPD system.
inline Eigen::VectorXd elimination_solve(const lcfem::SparseSym& A,
                                         const std::vector<lcfem::Vec3>& b_rows,
                                         const std::vector<double>& rhs_top) {
  using lcfem::Vec3;
  const int nodes = static_cast<int>(b_rows.size());
  const int nu = 3 * nodes;

  std::vector<Vec3> t1(nodes), t2(nodes);
  for (int z = 0; z < nodes; ++z) {
    const Vec3 m = b_rows[z];
    const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    int best = 0;
    double best_align = 1e300;
    for (int a = 0; a < 3; ++a) {
      const double align = std::abs(dot(m, axes[a]));
      if (align < best_align) {
        best_align = align;
        best = a;
      }
    }
    t1[z] = normalized(cross(m, axes[best]));
    t2[z] = normalized(cross(m, t1[z]));
  }

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nu, 2 * nodes);
  for (int z = 0; z < nodes; ++z)
    for (int c = 0; c < 3; ++c) {
      P(3 * z + c, 2 * z) = t1[z][c];
      P(3 * z + c, 2 * z + 1) = t2[z][c];
    }

  Eigen::MatrixXd Ad(nu, nu);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nu; ++j) Ad(i, j) = A.entry(i, j);

  Eigen::Map<const Eigen::VectorXd> f(rhs_top.data(), nu);
  const Eigen::MatrixXd R = P.transpose() * Ad * P;
  const Eigen::VectorXd alpha = R.ldlt().solve(P.transpose() * f);
  return P * alpha;
}

inline double energy_norm(const lcfem::SparseSym& A, const Eigen::VectorXd& v) {
  std::vector<double> x(v.data(), v.data() + v.size()), y;
  A.multiply(x, y);
  double q = 0.0;
  for (int i = 0; i < v.size(); ++i) q += x[i] * y[i];
  return std::sqrt(std::max(0.0, q));
}

}  // namespace test_oracles
