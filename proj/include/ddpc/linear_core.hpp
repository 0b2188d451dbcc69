#ifndef DDPC_LINEAR_CORE_HPP
#define DDPC_LINEAR_CORE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "ddpc/trajectory_data.hpp"

namespace ddpc {

class InfeasibleError : public std::runtime_error {
public:
  InfeasibleError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

// Moore-Penrose pseudoinverse via SVD; singular values below
// tolerance * max(sigma_max, scale_anchor) are treated as zero. The anchor
// (default 0) lets callers declare the problem scale so that matrices which
// vanish relative to it invert to zero instead of amplifying roundoff.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& M, double tolerance = kDefaultRankTol,
                     double scale_anchor = 0.0);

int numerical_rank(const Eigen::MatrixXd& M, double tolerance = kDefaultRankTol,
                   double scale_anchor = 0.0);

struct ProjectorPair {
  Eigen::MatrixXd Pi;       // Z^+ Z, projects onto the row space of Z
  Eigen::MatrixXd Pi_perp;  // I - Pi
};

ProjectorPair projectors(const Eigen::MatrixXd& Z, double tolerance = kDefaultRankTol);

// D = L * Q with L block-lower-triangular (rows x rows) and Q row-orthonormal
// (rows x ell). Diagonal of L normalized nonnegative. When ell < rows or D is
// rank deficient, trailing rows of Q are zero and diagonal_singular is set.
struct LQFactors {
  Eigen::MatrixXd L;
  Eigen::MatrixXd Q;
  int rows_w = 0;
  int rows_u = 0;
  int rows_y = 0;
  bool diagonal_singular = false;

  Eigen::Block<const Eigen::MatrixXd> L11() const { return L.block(0, 0, rows_w, rows_w); }
  Eigen::Block<const Eigen::MatrixXd> L21() const { return L.block(rows_w, 0, rows_u, rows_w); }
  Eigen::Block<const Eigen::MatrixXd> L22() const { return L.block(rows_w, rows_w, rows_u, rows_u); }
  Eigen::Block<const Eigen::MatrixXd> L31() const { return L.block(rows_w + rows_u, 0, rows_y, rows_w); }
  Eigen::Block<const Eigen::MatrixXd> L32() const { return L.block(rows_w + rows_u, rows_w, rows_y, rows_u); }
  Eigen::Block<const Eigen::MatrixXd> L33() const { return L.block(rows_w + rows_u, rows_w + rows_u, rows_y, rows_y); }
  Eigen::Block<const Eigen::MatrixXd> Q1() const { return Q.block(0, 0, rows_w, Q.cols()); }
  Eigen::Block<const Eigen::MatrixXd> Q2() const { return Q.block(rows_w, 0, rows_u, Q.cols()); }
  Eigen::Block<const Eigen::MatrixXd> Q3() const { return Q.block(rows_w + rows_u, 0, rows_y, Q.cols()); }
};

LQFactors lq_decompose(const Eigen::MatrixXd& D, int rows_w, int rows_u, int rows_y,
                       double tolerance = kDefaultRankTol);
LQFactors lq_decompose(const DataMatrix& data, double tolerance = kDefaultRankTol);

// v' * Wt * v for symmetric PSD Wt; throws on non-symmetric Wt.
double weighted_sqnorm(const Eigen::VectorXd& v, const Eigen::MatrixXd& Wt);

struct KktResult {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per row of Aeq
  double stationarity_residual = 0.0;
  double feasibility_residual = 0.0;
  bool hessian_singular = false;  // reduced Hessian rank deficient
};

// Minimizes 0.5 x'Hx + g'x subject to Aeq x = beq via the null-space method.
// H symmetric PSD. Returns the minimum-norm minimizer when the reduced system
// is singular; throws InfeasibleError when Aeq x = beq is inconsistent.
KktResult solve_kkt(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                    const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq,
                    double tolerance = kDefaultRankTol);

}  // namespace ddpc

#endif
