#pragma once

#include <functional>
#include <vector>

#include "lcfem/vec3.hpp"

namespace lcfem {

/// Square symmetric sparse matrix in compressed-row storage. Both triangles
/// are stored; structural symmetry is an invariant of the builders.
class SparseSym {
 public:
  SparseSym() = default;

  /// Builds the matrix skeleton from per-row sorted unique column lists.
  static SparseSym from_adjacency(std::vector<std::vector<int>> cols);

  struct Triplet {
    int row, col;
    double value;
  };

  /// Convenience builder; duplicate entries are summed.
  static SparseSym from_triplets(int n, std::vector<Triplet> triplets);

  int rows() const { return n_; }
  std::size_t nonzeros() const { return val_.size(); }

  /// Accumulates into an existing structural position; the position must
  /// exist in the skeleton.
  void add(int i, int j, double v);

  /// Value at (i,j); zero if the position is not stored.
  double entry(int i, int j) const;

  /// y = A x
  void multiply(const double* x, double* y) const;
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;

  /// x^T A x
  double quadratic_form(const std::vector<double>& x) const;

  bool structurally_symmetric() const;
  bool value_symmetric(double tol) const;

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return col_; }
  const std::vector<double>& values() const { return val_; }
  std::vector<double>& values() { return val_; }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;

  int position(int i, int j) const;  // -1 if absent
};

/// Abstract symmetric linear operator for iterative solvers.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  virtual int size() const = 0;
  virtual void apply(const std::vector<double>& x, std::vector<double>& y) const = 0;
};

/// Operator view of a SparseSym.
class SparseOperator final : public SymmetricOperator {
 public:
  explicit SparseOperator(const SparseSym& A) : A_(&A) {}
  int size() const override { return A_->rows(); }
  void apply(const std::vector<double>& x, std::vector<double>& y) const override {
    A_->multiply(x, y);
  }

 private:
  const SparseSym* A_;
};

/// D * Op * D with a positive diagonal D; symmetric whenever Op is.
/// Used to equilibrate saddle systems before a MINRES solve.
class DiagonallyScaledOperator final : public SymmetricOperator {
 public:
  DiagonallyScaledOperator(const SymmetricOperator& op, std::vector<double> scale);
  int size() const override { return static_cast<int>(scale_.size()); }
  void apply(const std::vector<double>& x, std::vector<double>& y) const override;
  const std::vector<double>& scale() const { return scale_; }

 private:
  const SymmetricOperator* op_;
  std::vector<double> scale_;
  mutable std::vector<double> tmp_;
};

struct MinresOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;               // 0: defaults to 10 * size
  const std::vector<double>* initial_guess = nullptr;
  bool record_residual_history = false;
  bool check_symmetry = true;     // one randomized probe per solve
};

struct MinresResult {
  std::vector<double> x;
  double residual = 0.0;           // ||rhs - op x||_2 at exit
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // filled on request
};

/// MINRES for symmetric (possibly indefinite) operators. Terminates when
/// ||rhs - op x|| <= rel_tol * ||rhs|| or after max_iter iterations; the
/// unconverged case is reported, not fatal. A zero rhs returns the zero
/// solution in zero iterations. Throws std::runtime_error if the symmetry
/// probe fails.
MinresResult minres(const SymmetricOperator& op, const std::vector<double>& rhs,
                    const MinresOptions& opts = {});

/// Block operator [A B^T; B 0] for the per-step tangent saddle system.
/// A acts on 3*n_int stacked director unknowns; row z of B holds the lumped
/// nodal form w(z) * n^k(z) so that (B u)_z = w(z) * (u(z) . n^k(z)).
class SaddleOperator final : public SymmetricOperator {
 public:
  SaddleOperator(const SparseSym& A, std::vector<Vec3> b_rows);

  int size() const override { return 4 * n_nodes_; }
  int displacement_size() const { return 3 * n_nodes_; }
  int multiplier_size() const { return n_nodes_; }
  const std::vector<Vec3>& b_rows() const { return b_rows_; }
  const SparseSym& a_block() const { return *A_; }

  /// y = [A u + B^T lambda; B u] for x = [u; lambda].
  void apply(const std::vector<double>& x, std::vector<double>& y) const override;

 private:
  const SparseSym* A_;
  std::vector<Vec3> b_rows_;
  int n_nodes_;
};

}  // namespace lcfem
