#ifndef DDPC_OCP_SOLVER_HPP
#define DDPC_OCP_SOLVER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddpc/regularizers.hpp"

namespace ddpc {

// Quadratic tracking objective J = ||y - y_ref||^2_Q + ||u - u_ref||^2_{R_u}.
struct ControlObjective {
  Eigen::MatrixXd Q;
  Eigen::VectorXd y_ref;
  Eigen::MatrixXd R_u;
  Eigen::VectorXd u_ref;
  // set when Q was built by replicating one positive definite per-step block;
  // the terminal-constrained predictor requires this structure
  std::optional<int> q_step_rows;

  static ControlObjective tracking(const Eigen::MatrixXd& Q_step, int N_f,
                                   Eigen::VectorXd y_ref,
                                   Eigen::MatrixXd R_u, Eigen::VectorXd u_ref);

  double eval(const Eigen::VectorXd& u, const Eigen::VectorXd& y) const;
  void validate(int u_dim, int y_dim) const;
};

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;  // entries may be +-inf

  void validate() const;
  bool contains(const Eigen::VectorXd& v, double tol) const;
};

struct TerminalEquality {
  Eigen::MatrixXd selector;  // full row rank
  Eigen::VectorXd target;

  // pins the last `steps` output blocks (block size `block_rows`) to the
  // matching entries of y_ref
  static TerminalEquality last_steps(int steps, int block_rows, int y_dim,
                                     const Eigen::VectorXd& y_ref);
};

struct Polyhedron {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  bool contains(const Eigen::VectorXd& v, double tol = 1e-9) const;
  static Polyhedron box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
};

struct ConstraintSet {
  std::optional<Box> u_box;
  std::optional<Box> y_box;
  std::optional<TerminalEquality> terminal;
  std::optional<Polyhedron> xi_set;  // feasibility reporting only
};

struct DPCProblem {
  DataMatrix data;
  ControlObjective objective;
  ConstraintSet constraints;
  Regularizer regularizer;
  Eigen::VectorXd xi;
  double tolerance = kDefaultRankTol;

  void validate() const;
};

enum class SolveStatus { optimal, infeasible };

std::string to_string(SolveStatus status);

struct SolveDiagnostics {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  int active_set_iterations = 0;
};

struct DPCSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd y;
  Eigen::VectorXd a;
  Eigen::VectorXd sigma;  // slack variant only
  double value = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::vector<int> active_set;  // variable indices (u block, then y block)
  SolveDiagnostics diagnostics;
  bool non_unique = false;
  double infeasibility_residual = 0.0;
};

// Solves the full OCP over (u, y, a) [and sigma]. A single KKT solve without
// box constraints; a primal active-set loop over the KKT kernel otherwise.
DPCSolution solve_full(const DPCProblem& prob);

// Eliminates a via the closed-form trajectory-specific cost and solves over
// (u, y) only; a (and sigma) are reconstructed as the inner-problem minimizer.
DPCSolution solve_reduced(const DPCProblem& prob);

// solve_full with additional equality rows E_u u + E_y y = rhs, used by the
// implicit-predictor verification re-solve.
DPCSolution solve_full_with_output_equality(const DPCProblem& prob,
                                            const Eigen::MatrixXd& E_u,
                                            const Eigen::MatrixXd& E_y,
                                            const Eigen::VectorXd& rhs);

struct FeasibilityReport {
  bool feasible = false;
  bool boxes_nonempty = false;
  bool terminal_consistent = false;
  bool xi_set_checked = false;
  bool xi_in_state_set = true;
  bool full_row_rank = false;
  bool checked_xi_image = false;
  double xi_image_residual = 0.0;
  std::string reason;
};

FeasibilityReport feasible(const DPCProblem& prob);

struct ClosedLoopStep {
  Eigen::VectorXd applied_input;
  Eigen::VectorXd next_xi;
  Eigen::VectorXd next_plant_state;  // noise-free plant state after the step
  DPCSolution solution;
};

// Receding-horizon step: solve, apply the first input block, simulate the
// plant once, roll the state window. The statespace overload reads the plant
// state from xi.
ClosedLoopStep closed_loop_step(const DPCProblem& prob, const SystemModel& plant,
                                const Eigen::VectorXd& plant_state,
                                std::uint64_t rng_seed);
ClosedLoopStep closed_loop_step(const DPCProblem& prob, const SystemModel& plant,
                                std::uint64_t rng_seed);

}  // namespace ddpc

#endif
