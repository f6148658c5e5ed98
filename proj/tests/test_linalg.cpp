#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <stdexcept>

#include "lcfem/linalg.hpp"

using namespace lcfem;

namespace {

class DenseOperator final : public SymmetricOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}
  int size() const override { return static_cast<int>(m_.rows()); }
  void apply(const std::vector<double>& x, std::vector<double>& y) const override {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), m_.cols());
    y.resize(m_.rows());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), m_.rows());
    yv = m_ * xv;
  }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

class IdentityOperator final : public SymmetricOperator {
 public:
  explicit IdentityOperator(int n) : n_(n) {}
  int size() const override { return n_; }
  void apply(const std::vector<double>& x, std::vector<double>& y) const override { y = x; }

 private:
  int n_;
};

Eigen::MatrixXd random_symmetric(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = dist(gen);
  return 0.5 * (a + a.transpose());
}

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

double nrm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("sparse matrix stores and multiplies") {
  // [2 -1 0; -1 2 -1; 0 -1 2]
  SparseSym A = SparseSym::from_triplets(
      3, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}, {1, 2, -1}, {2, 1, -1}, {2, 2, 2}});
  CHECK(A.structurally_symmetric());
  CHECK(A.value_symmetric(0.0));
  CHECK(A.entry(0, 2) == 0.0);
  std::vector<double> x = {1, 2, 3}, y;
  A.multiply(x, y);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(4.0));
  CHECK(A.quadratic_form(x) == doctest::Approx(0 * 1 + 0 * 2 + 4 * 3));
}

TEST_CASE("minres solves the identity in one iteration") {
  IdentityOperator op(8);
  const auto rhs = random_vector(8, 3);
  const MinresResult res = minres(op, rhs);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  for (int i = 0; i < 8; ++i) CHECK(res.x[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
}

TEST_CASE("minres returns zero for a zero right-hand side") {
  DenseOperator op(random_symmetric(10, 5));
  const MinresResult res = minres(op, std::vector<double>(10, 0.0));
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  for (double v : res.x) CHECK(v == 0.0);
}

TEST_CASE("minres matches a dense factorization on indefinite systems") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXd A = random_symmetric(20, seed);  // indefinite with high probability
    DenseOperator op(A);
    const auto rhs = random_vector(20, seed + 100);

    MinresOptions opts;
    opts.rel_tol = 1e-12;
    const MinresResult res = minres(op, rhs, opts);
    CHECK(res.converged);

    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), 20);
    const Eigen::VectorXd exact = A.partialPivLu().solve(b);
    for (int i = 0; i < 20; ++i) CHECK(res.x[i] == doctest::Approx(exact(i)).epsilon(1e-8));
  }
}

TEST_CASE("minres agrees with conjugate gradients on SPD systems") {
  // CG oracle, textbook form.
  auto conjugate_gradient = [](const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b, p = b;
    double rs = r.squaredNorm();
    for (int k = 0; k < 10 * b.size(); ++k) {
      const Eigen::VectorXd Ap = A * p;
      const double alpha = rs / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      const double rs_new = r.squaredNorm();
      if (std::sqrt(rs_new) < 1e-13 * b.norm()) break;
      p = r + (rs_new / rs) * p;
      rs = rs_new;
    }
    return x;
  };

  for (unsigned seed : {11u, 12u}) {
    Eigen::MatrixXd A = random_symmetric(50, seed);
    A = (A * A.transpose()).eval();
    A.diagonal().array() += 1.0;  // SPD
    DenseOperator op(A);
    const auto rhs = random_vector(50, seed + 7);
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), 50);

    MinresOptions opts;
    opts.rel_tol = 1e-13;
    const MinresResult res = minres(op, rhs, opts);
    const Eigen::VectorXd cg = conjugate_gradient(A, b);
    for (int i = 0; i < 50; ++i) CHECK(res.x[i] == doctest::Approx(cg(i)).epsilon(1e-8));
  }
}

TEST_CASE("minres residuals never increase") {
  const Eigen::MatrixXd A = random_symmetric(40, 21);
  DenseOperator op(A);
  const auto rhs = random_vector(40, 22);
  MinresOptions opts;
  opts.rel_tol = 1e-12;
  opts.record_residual_history = true;
  const MinresResult res = minres(op, rhs, opts);
  REQUIRE(res.residual_history.size() > 2);
  for (size_t k = 1; k < res.residual_history.size(); ++k)
    CHECK(res.residual_history[k] <= res.residual_history[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("minres reports non-convergence instead of failing") {
  Eigen::MatrixXd A = random_symmetric(30, 31);
  A = (A * A.transpose()).eval();
  A.diagonal().array() += 1e-6;  // ill-conditioned SPD
  DenseOperator op(A);
  MinresOptions opts;
  opts.rel_tol = 1e-14;
  opts.max_iter = 3;
  const MinresResult res = minres(op, random_vector(30, 32), opts);
  CHECK(!res.converged);
  CHECK(res.iterations == 3);
}

TEST_CASE("minres rejects unsymmetric operators") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  A(0, 1) = 1.0;  // no symmetric counterpart
  A.diagonal().array() = 1.0;
  DenseOperator op(A);
  CHECK_THROWS_AS(minres(op, random_vector(6, 33)), std::runtime_error);
}

TEST_CASE("minres honors a warm start") {
  const Eigen::MatrixXd A = random_symmetric(25, 41);
  DenseOperator op(A);
  const auto rhs = random_vector(25, 42);
  MinresOptions opts;
  opts.rel_tol = 1e-12;
  const MinresResult cold = minres(op, rhs, opts);

  opts.initial_guess = &cold.x;
  const MinresResult warm = minres(op, rhs, opts);
  CHECK(warm.converged);
  CHECK(warm.iterations <= 1);  // already at the solution
}

TEST_CASE("saddle operator applies the block structure") {
  // A = diag blocks on 3 unknowns per node, 2 nodes.
  SparseSym A = SparseSym::from_triplets(6, {{0, 0, 2},
                                             {1, 1, 2},
                                             {2, 2, 2},
                                             {3, 3, 3},
                                             {4, 4, 3},
                                             {5, 5, 3},
                                             {0, 3, 1},
                                             {3, 0, 1}});
  std::vector<Vec3> rows = {{0.5, 0, 0}, {0, 0, 0.25}};
  SaddleOperator op(A, rows);
  REQUIRE(op.size() == 8);

  SUBCASE("zero multiplier gives [A u; B u]") {
    std::vector<double> x = {1, 2, 3, 4, 5, 6, 0, 0}, y;
    op.apply(x, y);
    CHECK(y[0] == doctest::Approx(2 * 1 + 1 * 4));
    CHECK(y[3] == doctest::Approx(3 * 4 + 1 * 1));
    CHECK(y[6] == doctest::Approx(0.5 * 1));   // w n . u at node 0
    CHECK(y[7] == doctest::Approx(0.25 * 6));  // w n . u at node 1
  }

  SUBCASE("operator is symmetric") {
    std::mt19937 gen(55);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> x(8), y(8), ax, ay;
      for (double& v : x) v = dist(gen);
      for (double& v : y) v = dist(gen);
      op.apply(x, ax);
      op.apply(y, ay);
      double lhs = 0, rhs = 0;
      for (int i = 0; i < 8; ++i) {
        lhs += ax[i] * y[i];
        rhs += x[i] * ay[i];
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }

  SUBCASE("fields orthogonal to the rows are annihilated") {
    std::vector<double> x = {0, 1, 2, 3, 4, 0, 0, 0}, y;  // u(0) in {e2,e3}, u(1) in {e1,e2}
    op.apply(x, y);
    CHECK(y[6] == 0.0);
    CHECK(y[7] == 0.0);
  }

  SUBCASE("dimension mismatch is rejected") {
    std::vector<double> x(5), y;
    CHECK_THROWS_AS(op.apply(x, y), std::invalid_argument);
  }
}

TEST_CASE("saddle operator with no constraint rows degenerates gracefully") {
  SparseSym A = SparseSym::from_triplets(0, {});
  SaddleOperator op(A, {});
  CHECK(op.size() == 0);
  std::vector<double> x, y;
  op.apply(x, y);
  CHECK(y.empty());
}

TEST_CASE("diagonal scaling preserves symmetry and solutions") {
  const Eigen::MatrixXd A = random_symmetric(12, 77);
  DenseOperator op(A);
  std::vector<double> scale(12);
  std::mt19937 gen(78);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (double& s : scale) s = u(gen);
  DiagonallyScaledOperator scaled(op, scale);

  const auto rhs = random_vector(12, 79);
  std::vector<double> scaled_rhs(12);
  for (int i = 0; i < 12; ++i) scaled_rhs[i] = scale[i] * rhs[i];

  MinresOptions opts;
  opts.rel_tol = 1e-13;
  const MinresResult inner = minres(scaled, scaled_rhs, opts);
  REQUIRE(inner.converged);
  std::vector<double> x(12);
  for (int i = 0; i < 12; ++i) x[i] = scale[i] * inner.x[i];

  std::vector<double> ax;
  op.apply(x, ax);
  for (int i = 0; i < 12; ++i) ax[i] -= rhs[i];
  CHECK(nrm(ax) < 1e-9 * (1.0 + nrm(rhs)));
}
