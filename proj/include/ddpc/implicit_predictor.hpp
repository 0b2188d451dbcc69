#ifndef DDPC_IMPLICIT_PREDICTOR_HPP
#define DDPC_IMPLICIT_PREDICTOR_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ddpc/ocp_solver.hpp"
#include "ddpc/predictors.hpp"

namespace ddpc {

enum class PredictorVariant { unconstrained, affine, offset, terminal };

std::string to_string(PredictorVariant v);

// Affine map (xi, u) -> y_hat = M_xi xi + M_u u + c that leaves the OCP's
// minimizers and optimal value unchanged when added as an equality constraint.
struct ImplicitPredictorMap {
  Eigen::MatrixXd M_xi;
  Eigen::MatrixXd M_u;
  Eigen::VectorXd c;
  PredictorVariant variant = PredictorVariant::unconstrained;
  double lambda = 0.0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd y_ref;
  int n_terminal_rows = 0;
  bool soft_limit_fallback = false;

  Eigen::VectorXd eval(const Eigen::VectorXd& xi, const Eigen::VectorXd& u) const;
};

// Blend weights of the terminal-constrained predictor,
// y_hat = Lambda_ref y_ref + Lambda_reg y_LS. The bottom block-rows are
// exactly [0 I] and [0 0]; Lambda_ref + Lambda_reg = I.
struct TerminalWeights {
  Eigen::MatrixXd Lambda_ref;
  Eigen::MatrixXd Lambda_reg;
  int split = 0;  // rows ahead of the pinned block
};

ImplicitPredictorMap implicit_unconstrained(const LeastSquaresPredictor& P,
                                            const Eigen::MatrixXd& Q,
                                            const Eigen::VectorXd& y_ref,
                                            double lambda);

ImplicitPredictorMap implicit_affine(const AffineLeastSquaresPredictor& P,
                                     const Eigen::MatrixXd& Q,
                                     const Eigen::VectorXd& y_ref, double lambda);

ImplicitPredictorMap implicit_offset(const OffsetPredictor& P,
                                     const Eigen::MatrixXd& Q,
                                     const Eigen::VectorXd& y_ref, double lambda);

// Terminal-equality variant. The objective must carry the replicated
// per-step block structure (ControlObjective::tracking); n_terminal counts
// pinned output steps.
std::pair<ImplicitPredictorMap, TerminalWeights> implicit_terminal(
    const LeastSquaresPredictor& P, const ControlObjective& objective,
    double lambda, int n_terminal);

// Soft-constraint stand-in for the terminal equality: the bottom-right block
// of Q is replaced by q I (cross blocks zeroed) and the unconstrained formula
// applied. Fallback for objectives without the block structure, and the
// numerical limit check of the hard-constrained variant.
ImplicitPredictorMap implicit_terminal_soft(const LeastSquaresPredictor& P,
                                            const Eigen::MatrixXd& Q,
                                            const Eigen::VectorXd& y_ref,
                                            double lambda, int n_terminal_rows,
                                            double q = 1e8);

struct Definition2Report {
  int samples = 0;
  double max_inner_error = 0.0;       // relative, inner argmin vs map
  double max_value_error = 0.0;       // relative optimal-value change
  double max_minimizer_error = 0.0;   // minimizer distance, scaled
  bool passed = false;
  bool non_unique_encountered = false;
  double inner_tolerance = 1e-6;
  double value_tolerance = 1e-6;
  double minimizer_tolerance = 1e-5;
};

// Checks Definition 2 numerically: (a) for sampled (xi, u) the inner problem
// over (y, a) lands on the map; (b) re-solving the OCP with y = map(xi, u)
// appended leaves value and minimizer unchanged. Refuses problems outside the
// map's assumptions (output boxes, mismatched terminal constraints).
Definition2Report verify_definition2(const ImplicitPredictorMap& map,
                                     const DPCProblem& prob,
                                     const std::vector<Eigen::VectorXd>& xi_samples,
                                     const std::vector<Eigen::VectorXd>& u_samples,
                                     double inner_tol = 1e-6,
                                     double value_tol = 1e-6,
                                     double minimizer_tol = 1e-5);

}  // namespace ddpc

#endif
