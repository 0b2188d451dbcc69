#ifndef DDPC_PREDICTORS_HPP
#define DDPC_PREDICTORS_HPP

#include <Eigen/Dense>

#include "ddpc/trajectory_data.hpp"

namespace ddpc {

// Least-squares multistep predictor/controller fitted from a DataMatrix:
//   G_LS = Y Z^+,  K_LS = U W^+
// with residuals E_y = Y - G_LS Z, E_u = U - K_LS W and the residual-based
// weights Q_reg = (E_y E_y')^+, R_reg = (E_u E_u')^+. The weights are true
// inverses whenever D has full row rank; rank flags record the fallback.
struct LeastSquaresPredictor {
  Eigen::MatrixXd G_LS;
  Eigen::MatrixXd K_LS;
  Eigen::MatrixXd E_y;
  Eigen::MatrixXd E_u;

  Eigen::MatrixXd gram_y;   // E_y E_y'
  Eigen::MatrixXd gram_u;   // E_u E_u'
  Eigen::MatrixXd gram_w;   // W W'
  Eigen::MatrixXd Q_reg;    // gram_y^+
  Eigen::MatrixXd R_reg;    // gram_u^+
  Eigen::MatrixXd WWt_inv;  // gram_w^+
  // orthonormal basis of range(gram_y): output-deviation directions present
  // in the data (y_dim x r, r = y_dim under full row rank)
  Eigen::MatrixXd explored_output_basis;

  bool q_reg_full_rank = false;
  bool r_reg_full_rank = false;
  bool w_full_row_rank = false;

  int xi_dim = 0;
  int u_dim = 0;
  int y_dim = 0;
  double tolerance = kDefaultRankTol;

  Eigen::VectorXd predict_y(const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& u) const;
  Eigen::VectorXd predict_u(const Eigen::VectorXd& xi) const;

  Eigen::MatrixXd G_xi() const { return G_LS.leftCols(xi_dim); }
  Eigen::MatrixXd G_u() const { return G_LS.rightCols(u_dim); }
};

LeastSquaresPredictor fit_ls(const DataMatrix& data,
                             double tolerance = kDefaultRankTol);

// Affine fit on the ones-augmented data: [g_ALS G_ALS] = Y [1'; W; U]^+.
// `checked` is the plain least-squares fit of the augmented matrix; the split
// into linear part and offset is bookkeeping on top of it.
struct AffineLeastSquaresPredictor {
  LeastSquaresPredictor checked;
  Eigen::MatrixXd G_ALS;
  Eigen::VectorXd g_ALS;
  Eigen::MatrixXd K_ALS;
  Eigen::VectorXd k_ALS;
  int xi_dim = 0;  // un-augmented state dimension
  int u_dim = 0;
  int y_dim = 0;

  Eigen::VectorXd predict_y(const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& u) const;
  Eigen::VectorXd predict_u(const Eigen::VectorXd& xi) const;
};

AffineLeastSquaresPredictor fit_als(const DataMatrix& data,
                                    double tolerance = kDefaultRankTol);

// Least-squares predictor shifted by the trajectory w_bar = D a_bar:
//   y_hat(xi, u) = G_LS [xi; u] + c_y,   c_y = y_bar - G_LS [xi_bar; u_bar].
struct OffsetPredictor {
  LeastSquaresPredictor base;
  Eigen::VectorXd xi_bar;
  Eigen::VectorXd u_bar;
  Eigen::VectorXd y_bar;
  Eigen::VectorXd c_y;

  Eigen::VectorXd predict_y(const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& u) const;
};

OffsetPredictor offset_predictor(const LeastSquaresPredictor& P,
                                 const DataMatrix& data,
                                 const Eigen::VectorXd& a_bar);

}  // namespace ddpc

#endif
