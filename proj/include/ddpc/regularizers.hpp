#ifndef DDPC_REGULARIZERS_HPP
#define DDPC_REGULARIZERS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ddpc/linear_core.hpp"
#include "ddpc/predictors.hpp"
#include "ddpc/trajectory_data.hpp"

namespace ddpc {

enum class RegKind {
  quadratic,         // lambda ||a||^2
  projection_perp,   // lambda ||Pi_perp a||^2
  projection_par,    // lambda ||Pi a||^2
  mixed_projection,  // l2 ||Pi a||^2 + l3 ||Pi_perp a||^2
  offset_quadratic,  // lambda ||a - a_bar||^2
  gamma_ddpc,        // l2 ||gamma_2||^2 + l3 ||gamma_3||^2 (optionally gamma_3 = 0)
  slack_quadratic,   // lambda ||a||^2 + lambda_sigma ||sigma||^2
  general_weighted,  // ||S a||^2, brute force only
};

std::string to_string(RegKind kind);

struct Regularizer {
  RegKind kind = RegKind::quadratic;
  double lambda = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda_sigma = 0.0;
  bool gamma3_zero = false;
  bool affine = false;  // adds the affine combination constraint 1'a = 1
  Eigen::VectorXd a_bar;
  Eigen::MatrixXd S;

  bool has_closed_form() const { return kind != RegKind::general_weighted; }
  void validate(long ell) const;

  // textual form, e.g. "quadratic:lambda=10" or "mixed:l2=0.1,l3=1e6";
  // vector-valued parameters reference CSV files as "abar=@file.csv"
  static Regularizer parse(const std::string& spec);
  std::string to_spec() const;

  static Regularizer quadratic(double lambda);
  static Regularizer projection_perp(double lambda);
  static Regularizer projection_par(double lambda);
  static Regularizer mixed(double l2, double l3);
  static Regularizer offset(double lambda, Eigen::VectorXd a_bar);
  static Regularizer gamma(double l2, double l3, bool gamma3_zero = false);
  static Regularizer slack(double lambda, double lambda_sigma);
  static Regularizer general(Eigen::MatrixXd S);
};

struct TrajectoryCostBreakdown {
  double total = 0.0;
  double term_y = 0.0;   // output deviation term
  double term_u = 0.0;   // input deviation term
  double term_xi = 0.0;  // state term (constant in the OCP)
  double weight_y = 0.0;
  double weight_u = 0.0;
  double weight_xi = 0.0;
  bool term_y_active = false;
  bool term_u_active = false;
  bool term_xi_active = false;
  bool closed_form = true;
  // gamma-DDPC with gamma_3 = 0: the y-deviation is a hard constraint
  bool gamma3_constrained = false;
  double gamma3_residual = 0.0;
};

// Closed-form trajectory-specific effect h*(xi, u, y) of the regularizer for
// a predictor fitted on `data`. The affine flag on the regularizer selects
// the checked (ones-augmented) quantities; pass the matching fit.
TrajectoryCostBreakdown trajectory_cost(const Regularizer& reg,
                                        const LeastSquaresPredictor& P,
                                        const DataMatrix& data,
                                        const TrajectoryTuple& w);
TrajectoryCostBreakdown trajectory_cost(const Regularizer& reg,
                                        const AffineLeastSquaresPredictor& P,
                                        const DataMatrix& data,
                                        const TrajectoryTuple& w);
TrajectoryCostBreakdown trajectory_cost(const Regularizer& reg,
                                        const OffsetPredictor& P,
                                        const DataMatrix& data,
                                        const TrajectoryTuple& w);

// Quadratic form of h over the generator (and slack) variables, used by the
// brute-force oracle and the OCP assembly: h = 0.5 a'H a + g'a + constant.
struct RegularizerQuadraticForm {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double constant = 0.0;
  int n_sigma = 0;               // trailing slack variables (slack variant)
  Eigen::MatrixXd extra_rows;    // extra equality rows on a (gamma_3 = 0)
  Eigen::VectorXd extra_rhs;
};

RegularizerQuadraticForm regularizer_quadratic_form(const Regularizer& reg,
                                                    const DataMatrix& data,
                                                    double tolerance = kDefaultRankTol);

struct BruteForceResult {
  double cost = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd sigma;  // slack variant only
  double feasibility_residual = 0.0;
};

// Solves min_a h(a) s.t. D a = w (plus 1'a = 1 when affine) exactly via the
// equality-constrained QP kernel; the independent oracle for every closed form.
BruteForceResult brute_force_cost(const Regularizer& reg, const DataMatrix& data,
                                  const TrajectoryTuple& w,
                                  bool affine = false,
                                  double tolerance = kDefaultRankTol);

struct GammaCoordinates {
  Eigen::VectorXd gamma1;
  Eigen::VectorXd gamma2;
  Eigen::VectorXd gamma3;
  bool used_pinv_fallback = false;
};

// Forward substitution through the LQ blocks:
// gamma1 = L11^-1 xi, gamma2 = L22^-1 (u - L21 g1), gamma3 = L33^-1 (y - ...).
GammaCoordinates gamma_from_trajectory(const LQFactors& F,
                                       const TrajectoryTuple& w,
                                       bool allow_pinv_fallback = true,
                                       double tolerance = kDefaultRankTol);

struct SlackAugmentation {
  DataMatrix data;
  int n_slack = 0;        // number of artificial columns appended
  int slack_row_offset = 0;  // first W row the slack block acts on
  double column_scale = 0.0;  // sqrt(lambda / lambda_sigma)
};

// Appends the artificial trajectory columns that make the explicit-slack
// formulation a plain quadratic-regularized problem on the augmented matrix.
SlackAugmentation slack_augment(const DataMatrix& data, double lambda,
                                double lambda_sigma);

// lambda_new = (ell_new / ell_old) * lambda_old, elementwise
std::vector<double> rescale_weights(const std::vector<double>& lambdas,
                                    long ell_old, long ell_new);

}  // namespace ddpc

#endif
