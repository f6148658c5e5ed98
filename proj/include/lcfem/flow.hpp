#pragma once

#include <memory>
#include <string>

#include "lcfem/energy.hpp"
#include "lcfem/linalg.hpp"

namespace lcfem {

struct FlowConfig {
  double tau = 0.1;             // pseudotime step
  double eps = 1e-4;            // stopping tolerance: stop when E^{k-1}-E^k < tau*eps
  int max_steps = 200000;
  double solver_rel_tol = 1e-10;
  int solver_max_iter = 0;      // 0: 10 * unknowns
  bool record_history = true;   // keep per-step records in FlowState

  /// Invoked after every accepted step (snapshot hooks).
  std::function<void(int step, const DirectorField&)> on_step;
};

struct FlowStepRecord {
  int step = 0;
  EnergyBreakdown energy;
  double err1 = 0.0;
  double err_inf = 0.0;
  int minres_iters = 0;
  double grad_increment_sq = 0.0;  // ||grad d_t n||^2 of the accepted increment
};

struct FlowState {
  enum class Status { Converged, MaxSteps };

  DirectorField field;
  int steps = 0;
  Status status = Status::Converged;
  std::vector<FlowStepRecord> history;  // entry 0 describes the initial state
};

/// Raised when a step increases the energy beyond roundoff slack (the
/// practical symptom of tau/h being too large) or the solver stalls. Carries
/// the state reached so far so callers can keep partial outputs.
struct FlowError : std::runtime_error {
  FlowState partial;
  FlowError(const std::string& what, FlowState state)
      : std::runtime_error(what), partial(std::move(state)) {}
};

struct TangentStep {
  DirectorField increment;   // zero on Dirichlet nodes, nodally orthogonal to n^k
  ScalarField multiplier;    // zero on Dirichlet nodes
  int minres_iters = 0;
  double residual = 0.0;     // true saddle residual of the returned solution
  bool converged = true;
};

/// One gradient-flow step factory: holds the step matrix
/// A = (1 + c0 tau) K + c1 tau D on interior unknowns (fixed along the flow)
/// and rebuilds the constraint rows and right-hand side from the current
/// iterate.
class FlowSolver {
 public:
  FlowSolver(const P1Space& space, const DofMap& dofs, const FrankConstants& fc,
             const FlowConfig& config);

  /// Constraint rows w(z) n^k(z) and the stacked right-hand side
  /// [ -dE_total[n^k; .] ; 0 ].
  struct StepSystem {
    SaddleOperator op;
    std::vector<double> rhs;
  };
  StepSystem build_step_system(const DirectorField& n_k) const;

  /// Solves the saddle system by (diagonally equilibrated) MINRES, then
  /// snaps the increment onto the nodal tangent planes so the constraint
  /// holds exactly. Pass the previous increment as a warm start.
  TangentStep tangent_step(const DirectorField& n_k, const TangentStep* warm_start = nullptr) const;

  const SparseSym& step_matrix() const { return A_; }
  const ModifiedConstants& constants() const { return mc_; }

 private:
  const P1Space* space_;
  const DofMap* dofs_;
  FrankConstants fc_;
  ModifiedConstants mc_;
  FlowConfig config_;
  SparseSym A_;
};

/// Runs the flow until E^{k-1} - E^k < tau*eps (at least one step is always
/// attempted) or max_steps. Requires |n0(z)| = 1 at every node. Throws
/// FlowError on energy increase beyond slack 1e-8 (1 + |E|) or on solver
/// failure.
FlowState run_gradient_flow(const P1Space& space, const DofMap& dofs, const DirectorField& n0,
                            const FrankConstants& fc, const FlowConfig& config);

/// Writes the per-step history as CSV with the fixed column set
/// step,E_total,E_one_const,splay_w,twist_w,bend_w,E_mag,err1,errInf,
/// minres_iters,grad_increment_norm_sq.
void write_history_csv(const FlowState& state, const std::string& path);

}  // namespace lcfem
