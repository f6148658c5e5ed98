#include "lcfem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lcfem {

SparseSym SparseSym::from_adjacency(std::vector<std::vector<int>> cols) {
  SparseSym A;
  A.n_ = static_cast<int>(cols.size());
  A.row_ptr_.assign(A.n_ + 1, 0);
  for (int i = 0; i < A.n_; ++i) A.row_ptr_[i + 1] = A.row_ptr_[i] + static_cast<int>(cols[i].size());
  A.col_.reserve(A.row_ptr_[A.n_]);
  for (auto& row : cols) A.col_.insert(A.col_.end(), row.begin(), row.end());
  A.val_.assign(A.col_.size(), 0.0);
  return A;
}

SparseSym SparseSym::from_triplets(int n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseSym A;
  A.n_ = n;
  A.row_ptr_.assign(n + 1, 0);
  for (size_t k = 0; k < triplets.size();) {
    size_t j = k;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[k].row &&
           triplets[j].col == triplets[k].col)
      sum += triplets[j++].value;
    A.col_.push_back(triplets[k].col);
    A.val_.push_back(sum);
    ++A.row_ptr_[triplets[k].row + 1];
    k = j;
  }
  for (int i = 0; i < n; ++i) A.row_ptr_[i + 1] += A.row_ptr_[i];
  return A;
}

int SparseSym::position(int i, int j) const {
  const int* begin = col_.data() + row_ptr_[i];
  const int* end = col_.data() + row_ptr_[i + 1];
  const int* it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return -1;
  return static_cast<int>(it - col_.data());
}

void SparseSym::add(int i, int j, double v) {
  const int p = position(i, j);
  if (p < 0) throw std::logic_error("SparseSym::add: entry not in skeleton");
  val_[p] += v;
}

double SparseSym::entry(int i, int j) const {
  const int p = position(i, j);
  return p < 0 ? 0.0 : val_[p];
}

void SparseSym::multiply(const double* x, double* y) const {
  for (int i = 0; i < n_; ++i) {
    const int end = row_ptr_[i + 1];
    double sum = 0.0;
    for (int k = row_ptr_[i]; k < end; ++k) sum += val_[k] * x[col_[k]];
    y[i] = sum;
  }
}

void SparseSym::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(n_);
  multiply(x.data(), y.data());
}

double SparseSym::quadratic_form(const std::vector<double>& x) const {
  double q = 0.0;
  for (int i = 0; i < n_; ++i) {
    const int end = row_ptr_[i + 1];
    double sum = 0.0;
    for (int k = row_ptr_[i]; k < end; ++k) sum += val_[k] * x[col_[k]];
    q += x[i] * sum;
  }
  return q;
}

bool SparseSym::structurally_symmetric() const {
  for (int i = 0; i < n_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (position(col_[k], i) < 0) return false;
  return true;
}

bool SparseSym::value_symmetric(double tol) const {
  for (int i = 0; i < n_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (std::abs(entry(col_[k], i) - val_[k]) > tol) return false;
  return true;
}

DiagonallyScaledOperator::DiagonallyScaledOperator(const SymmetricOperator& op,
                                                   std::vector<double> scale)
    : op_(&op), scale_(std::move(scale)) {
  if (static_cast<int>(scale_.size()) != op.size())
    throw std::invalid_argument("DiagonallyScaledOperator: scale size mismatch");
}

void DiagonallyScaledOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const size_t n = scale_.size();
  tmp_.resize(n);
  for (size_t i = 0; i < n; ++i) tmp_[i] = scale_[i] * x[i];
  op_->apply(tmp_, y);
  for (size_t i = 0; i < n; ++i) y[i] *= scale_[i];
}

namespace {

double nrm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void symmetry_probe(const SymmetricOperator& op) {
  const int n = op.size();
  if (n == 0) return;
  std::mt19937 gen(0x5ca1ab1eu + static_cast<unsigned>(n));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(n), v(n), au(n), av(n);
  for (int i = 0; i < n; ++i) {
    u[i] = dist(gen);
    v[i] = dist(gen);
  }
  op.apply(u, au);
  op.apply(v, av);
  const double lhs = dot_vec(au, v), rhs = dot_vec(u, av);
  const double scale = nrm2(au) * nrm2(v) + nrm2(u) * nrm2(av) + 1e-300;
  if (std::abs(lhs - rhs) > 1e-10 * scale)
    throw std::runtime_error("minres: operator failed the symmetry probe");
}

}  // namespace

MinresResult minres(const SymmetricOperator& op, const std::vector<double>& rhs,
                    const MinresOptions& opts) {
  const int n = op.size();
  if (static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("minres: rhs size does not match operator");

  MinresResult result;
  result.x.assign(n, 0.0);

  const double rhs_norm = nrm2(rhs);
  if (rhs_norm == 0.0) {
    // Zero data has the zero solution; do no work.
    result.converged = true;
    return result;
  }

  if (opts.check_symmetry) symmetry_probe(op);

  if (opts.initial_guess) {
    if (static_cast<int>(opts.initial_guess->size()) != n)
      throw std::invalid_argument("minres: initial guess size mismatch");
    result.x = *opts.initial_guess;
  }

  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;
  const double tol_abs = opts.rel_tol * rhs_norm;

  // Lanczos / Givens recurrence (Paige & Saunders).
  std::vector<double> r(n), v(n), v_prev(n, 0.0), p(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0);
  op.apply(result.x, p);
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - p[i];

  double beta = nrm2(r);
  if (opts.record_residual_history) result.residual_history.push_back(beta);
  if (beta <= tol_abs) {
    result.converged = true;
    result.residual = beta;
    return result;
  }
  for (int i = 0; i < n; ++i) v[i] = r[i] / beta;

  double eta = beta;
  double gamma1 = 1.0, gamma0 = 1.0;
  double sigma1 = 0.0, sigma0 = 0.0;
  double res = beta;

  int k = 0;
  while (k < max_iter) {
    ++k;
    op.apply(v, p);
    const double alpha = dot_vec(v, p);
    for (int i = 0; i < n; ++i) p[i] -= alpha * v[i] + beta * v_prev[i];
    const double beta_next = nrm2(p);

    const double delta = gamma1 * alpha - gamma0 * sigma1 * beta;
    const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
    const double rho2 = sigma1 * alpha + gamma0 * gamma1 * beta;
    const double rho3 = sigma0 * beta;
    const double gamma = delta / rho1;
    const double sigma = beta_next / rho1;

    for (int i = 0; i < n; ++i) {
      w[i] = (v[i] - rho3 * w2[i] - rho2 * w1[i]) / rho1;
      result.x[i] += gamma * eta * w[i];
    }
    eta = -sigma * eta;
    res = std::abs(eta);
    if (opts.record_residual_history) result.residual_history.push_back(res);

    if (res <= tol_abs || beta_next == 0.0) break;

    for (int i = 0; i < n; ++i) {
      v_prev[i] = v[i];
      v[i] = p[i] / beta_next;
    }
    std::swap(w2, w1);
    std::swap(w1, w);
    beta = beta_next;
    gamma0 = gamma1;
    gamma1 = gamma;
    sigma0 = sigma1;
    sigma1 = sigma;
  }

  result.iterations = k;
  // Report the true residual rather than the recurrence estimate.
  op.apply(result.x, p);
  for (int i = 0; i < n; ++i) p[i] -= rhs[i];
  result.residual = nrm2(p);
  result.converged = result.residual <= tol_abs * (1.0 + 1e-6);
  return result;
}

SaddleOperator::SaddleOperator(const SparseSym& A, std::vector<Vec3> b_rows)
    : A_(&A), b_rows_(std::move(b_rows)), n_nodes_(static_cast<int>(b_rows_.size())) {
  if (A.rows() != 3 * n_nodes_)
    throw std::invalid_argument("SaddleOperator: A must act on 3 unknowns per constraint row");
}

void SaddleOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
  if (static_cast<int>(x.size()) != size())
    throw std::invalid_argument("SaddleOperator::apply: dimension mismatch");
  y.resize(size());
  const int nu = 3 * n_nodes_;
  A_->multiply(x.data(), y.data());
  for (int z = 0; z < n_nodes_; ++z) {
    const Vec3& row = b_rows_[z];
    const double lambda = x[nu + z];
    y[3 * z + 0] += row.x * lambda;
    y[3 * z + 1] += row.y * lambda;
    y[3 * z + 2] += row.z * lambda;
    y[nu + z] = row.x * x[3 * z + 0] + row.y * x[3 * z + 1] + row.z * x[3 * z + 2];
  }
}

}  // namespace lcfem
