#include "lcfem/flow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lcfem {

namespace {

// A = (1 + c0 tau) K (blockwise) + c1 tau D, on stacked interior unknowns.
SparseSym build_step_matrix(const P1Space& space, const DofMap& dofs, const ModifiedConstants& mc,
                            double tau) {
  const SparseSym K = assemble_stiffness(space, dofs);
  SparseSym A = assemble_divdiv(space, dofs);
  auto& val = A.values();
  for (double& v : val) v *= mc.c1 * tau;
  const double k_coef = 1.0 + mc.c0 * tau;
  const auto& krows = K.row_ptr();
  const auto& kcols = K.cols();
  const auto& kvals = K.values();
  for (int i = 0; i < K.rows(); ++i)
    for (int p = krows[i]; p < krows[i + 1]; ++p)
      for (int c = 0; c < 3; ++c) A.add(3 * i + c, 3 * kcols[p] + c, k_coef * kvals[p]);
  return A;
}

}  // namespace

FlowSolver::FlowSolver(const P1Space& space, const DofMap& dofs, const FrankConstants& fc,
                       const FlowConfig& config)
    : space_(&space),
      dofs_(&dofs),
      fc_(fc),
      mc_(modified_constants(fc)),
      config_(config),
      A_(build_step_matrix(space, dofs, mc_, config.tau)) {
  if (!(config.tau > 0.0)) throw std::invalid_argument("FlowSolver: tau must be positive");
  if (!(config.eps > 0.0)) throw std::invalid_argument("FlowSolver: eps must be positive");
}

FlowSolver::StepSystem FlowSolver::build_step_system(const DirectorField& n_k) const {
  const int n_int = dofs_->n_interior();
  std::vector<Vec3> b_rows(n_int);
  for (int i = 0; i < n_int; ++i) {
    const int v = dofs_->interior[i];
    b_rows[i] = space_->lumped_weights[v] * n_k.values[v];
  }
  std::vector<double> rhs = first_variation_terms(*space_, n_k, mc_, fc_.chi_A, fc_.field, *dofs_);
  rhs.resize(4 * n_int, 0.0);  // multiplier block of the right-hand side is zero
  return StepSystem{SaddleOperator(A_, std::move(b_rows)), std::move(rhs)};
}

TangentStep FlowSolver::tangent_step(const DirectorField& n_k, const TangentStep* warm_start) const {
  const int n_int = dofs_->n_interior();
  StepSystem sys = build_step_system(n_k);

  // Equilibrate: 1/sqrt(diag A) on the director block, the matching Schur
  // estimate on the multiplier block. This removes the h^3 disparity the
  // lumped constraint rows carry.
  std::vector<double> scale(4 * n_int, 1.0);
  for (int i = 0; i < 3 * n_int; ++i) {
    const double d = sys.op.a_block().entry(i, i);
    scale[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  for (int z = 0; z < n_int; ++z) {
    const Vec3& row = sys.op.b_rows()[z];
    double schur = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = sys.op.a_block().entry(3 * z + c, 3 * z + c);
      schur += row[c] * row[c] / (d > 0.0 ? d : 1.0);
    }
    scale[3 * n_int + z] = schur > 0.0 ? 1.0 / std::sqrt(schur) : 1.0;
  }
  DiagonallyScaledOperator scaled(sys.op, scale);

  std::vector<double> scaled_rhs(4 * n_int);
  for (int i = 0; i < 4 * n_int; ++i) scaled_rhs[i] = scale[i] * sys.rhs[i];

  std::vector<double> guess;
  MinresOptions opts;
  opts.rel_tol = config_.solver_rel_tol;
  opts.max_iter = config_.solver_max_iter;
  opts.check_symmetry = false;  // the block form is symmetric by construction
  if (warm_start && warm_start->increment.mesh) {
    guess.assign(4 * n_int, 0.0);
    for (int i = 0; i < n_int; ++i) {
      const int v = dofs_->interior[i];
      const Vec3& inc = warm_start->increment.values[v];
      for (int c = 0; c < 3; ++c) guess[3 * i + c] = inc[c] / scale[3 * i + c];
      guess[3 * n_int + i] = warm_start->multiplier.values[v] / scale[3 * n_int + i];
    }
    opts.initial_guess = &guess;
  }

  MinresResult sol = minres(scaled, scaled_rhs, opts);
  if (!sol.converged) {
    // One more attempt from the current iterate before reporting failure.
    MinresOptions retry = opts;
    retry.initial_guess = &sol.x;
    retry.max_iter = (opts.max_iter > 0 ? opts.max_iter : 10 * scaled.size()) * 2;
    MinresResult second = minres(scaled, scaled_rhs, retry);
    second.iterations += sol.iterations;
    sol = std::move(second);
  }

  TangentStep step;
  step.minres_iters = sol.iterations;
  step.converged = sol.converged;
  step.increment = DirectorField(*space_->mesh);
  step.multiplier = ScalarField(*space_->mesh);
  for (int i = 0; i < n_int; ++i) {
    const int v = dofs_->interior[i];
    Vec3 d{scale[3 * i] * sol.x[3 * i], scale[3 * i + 1] * sol.x[3 * i + 1],
           scale[3 * i + 2] * sol.x[3 * i + 2]};
    // Snap onto the tangent plane of n^k(z); the exact solution lies there,
    // this removes the solver residual's normal component.
    const Vec3& m = n_k.values[v];
    const double m2 = norm_sq(m);
    if (m2 > 0.0) d -= (dot(d, m) / m2) * m;
    step.increment.values[v] = d;
    step.multiplier.values[v] = scale[3 * n_int + i] * sol.x[3 * n_int + i];
  }

  // True residual of the unscaled system for the reported (projected) state.
  std::vector<double> x(4 * n_int), r(4 * n_int);
  for (int i = 0; i < n_int; ++i) {
    const int v = dofs_->interior[i];
    for (int c = 0; c < 3; ++c) x[3 * i + c] = step.increment.values[v][c];
    x[3 * n_int + i] = step.multiplier.values[v];
  }
  sys.op.apply(x, r);
  double rr = 0.0, bb = 0.0;
  for (int i = 0; i < 4 * n_int; ++i) {
    const double d = r[i] - sys.rhs[i];
    rr += d * d;
    bb += sys.rhs[i] * sys.rhs[i];
  }
  step.residual = std::sqrt(rr);
  if (bb > 0.0 && step.residual > 100.0 * config_.solver_rel_tol * std::sqrt(bb))
    step.converged = false;
  return step;
}

namespace {

FlowStepRecord make_record(int step, const P1Space& space, const DirectorField& n,
                           const ModifiedConstants& mc, const FrankConstants& fc) {
  FlowStepRecord rec;
  rec.step = step;
  rec.energy = energy_terms(space, n, mc, fc.chi_A, fc.field);
  rec.err1 = constraint_error(space, n, 1.0);
  rec.err_inf = constraint_error(space, n, kLinf);
  return rec;
}

}  // namespace

FlowState run_gradient_flow(const P1Space& space, const DofMap& dofs, const DirectorField& n0,
                            const FrankConstants& fc, const FlowConfig& config) {
  const ModifiedConstants mc = modified_constants(fc);

  // Unit nodal length of the initial state is a structural requirement:
  // monotone nodal lengths and the L1 bound both build on it.
  {
    double worst = 0.0;
    for (const Vec3& v : n0.values) worst = std::max(worst, std::abs(norm_sq(v) - 1.0));
    if (worst > 1e-8)
      throw std::invalid_argument(
          "run_gradient_flow: initial field must have unit nodal lengths (err_inf = " +
          std::to_string(worst) + ")");
  }

  FlowSolver solver(space, dofs, fc, config);
  FlowState state;
  state.field = n0;

  FlowStepRecord current = make_record(0, space, state.field, mc, fc);
  if (config.record_history) state.history.push_back(current);

  double prev_energy = std::numeric_limits<double>::infinity();
  TangentStep step, previous;
  TangentStep warm;  // linear prediction from the last two increments
  state.status = FlowState::Status::MaxSteps;

  for (int k = 0; k < config.max_steps; ++k) {
    const TangentStep* guess = nullptr;
    if (k == 1) {
      guess = &step;
    } else if (k > 1) {
      warm = step;
      for (size_t i = 0; i < warm.increment.values.size(); ++i)
        warm.increment.values[i] += step.increment.values[i] - previous.increment.values[i];
      for (size_t i = 0; i < warm.multiplier.values.size(); ++i)
        warm.multiplier.values[i] += step.multiplier.values[i] - previous.multiplier.values[i];
      guess = &warm;
    }
    previous = step;
    step = solver.tangent_step(state.field, guess);
    if (!step.converged)
      throw FlowError("gradient flow: solver did not converge at step " + std::to_string(k + 1) +
                          " (residual " + std::to_string(step.residual) + ")",
                      std::move(state));

    for (int i = 0; i < dofs.n_interior(); ++i) {
      const int v = dofs.interior[i];
      state.field.values[v] += config.tau * step.increment.values[v];
    }
    ++state.steps;

    FlowStepRecord next = make_record(state.steps, space, state.field, mc, fc);
    next.minres_iters = step.minres_iters;
    next.grad_increment_sq = grad_norm_sq(space, step.increment);
    if (config.record_history) state.history.push_back(next);
    if (config.on_step) config.on_step(state.steps, state.field);

    const double slack = 1e-8 * (1.0 + std::abs(current.energy.total));
    if (next.energy.total > current.energy.total + slack)
      throw FlowError("gradient flow: energy increased at step " + std::to_string(state.steps) +
                          " (" + std::to_string(current.energy.total) + " -> " +
                          std::to_string(next.energy.total) +
                          "); tau/h is likely above the stability constant",
                      std::move(state));

    prev_energy = current.energy.total;
    current = next;
    if (prev_energy - current.energy.total < config.tau * config.eps) {
      state.status = FlowState::Status::Converged;
      break;
    }
  }

  return state;
}

void write_history_csv(const FlowState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "step,E_total,E_one_const,splay_w,twist_w,bend_w,E_mag,err1,errInf,minres_iters,"
         "grad_increment_norm_sq\n";
  char buf[360];
  for (const auto& rec : state.history) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%.12g\n",
                  rec.step, rec.energy.total, rec.energy.one_constant, rec.energy.splay_w,
                  rec.energy.twist_w, rec.energy.bend_w, rec.energy.magnetic, rec.err1, rec.err_inf,
                  rec.minres_iters, rec.grad_increment_sq);
    out << buf;
  }
}

}  // namespace lcfem
