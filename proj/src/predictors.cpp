#include "ddpc/predictors.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "ddpc/linear_core.hpp"

namespace ddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd LeastSquaresPredictor::predict_y(const VectorXd& xi,
                                          const VectorXd& u) const {
  if (xi.size() != xi_dim || u.size() != u_dim) {
    throw std::invalid_argument("predict_y: dimension mismatch");
  }
  VectorXd z(xi_dim + u_dim);
  z << xi, u;
  return G_LS * z;
}

VectorXd LeastSquaresPredictor::predict_u(const VectorXd& xi) const {
  if (xi.size() != xi_dim) {
    throw std::invalid_argument("predict_u: dimension mismatch");
  }
  return K_LS * xi;
}

LeastSquaresPredictor fit_ls(const DataMatrix& data, double tolerance) {
  LeastSquaresPredictor P;
  P.xi_dim = data.w_rows();
  P.u_dim = data.u_rows();
  P.y_dim = data.y_rows();
  P.tolerance = tolerance;

  const MatrixXd Z = data.Z();
  const MatrixXd& W = data.W();
  const MatrixXd& U = data.U();
  const MatrixXd& Y = data.Y();

  P.G_LS = Y * pinv(Z, tolerance);
  P.K_LS = U * pinv(W, tolerance);
  P.E_y = Y - P.G_LS * Z;
  P.E_u = U - P.K_LS * W;

  P.gram_y = P.E_y * P.E_y.transpose();
  P.gram_u = P.E_u * P.E_u.transpose();
  P.gram_w = W * W.transpose();
  // Residual grams sit at squared-roundoff level when the fit is exact; a
  // noise floor relative to the signal power keeps those from being inverted
  // into garbage weights. Genuinely small residuals stay far above the floor.
  const double y_floor = 1e-13 * Y.squaredNorm();
  const double u_floor = 1e-13 * U.squaredNorm();
  P.Q_reg = pinv(P.gram_y, tolerance, y_floor);
  P.R_reg = pinv(P.gram_u, tolerance, u_floor);
  P.WWt_inv = pinv(P.gram_w, tolerance);
  P.q_reg_full_rank =
      numerical_rank(P.gram_y, tolerance, y_floor) == P.gram_y.rows();
  P.r_reg_full_rank =
      numerical_rank(P.gram_u, tolerance, u_floor) == P.gram_u.rows();
  P.w_full_row_rank = numerical_rank(W, tolerance) == W.rows();

  // orthonormal basis of the output-deviation directions actually present in
  // the data; implicit predictors pin predictions in the complement
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(P.gram_y);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff =
        tolerance * std::max(ev.size() > 0 ? ev(ev.size() - 1) : 0.0, y_floor);
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) > cutoff) ++r;
    }
    P.explored_output_basis = eig.eigenvectors().rightCols(r);
  }
  return P;
}

VectorXd AffineLeastSquaresPredictor::predict_y(const VectorXd& xi,
                                                const VectorXd& u) const {
  if (xi.size() != xi_dim || u.size() != u_dim) {
    throw std::invalid_argument("predict_y: dimension mismatch");
  }
  VectorXd z(xi_dim + u_dim);
  z << xi, u;
  return G_ALS * z + g_ALS;
}

VectorXd AffineLeastSquaresPredictor::predict_u(const VectorXd& xi) const {
  if (xi.size() != xi_dim) {
    throw std::invalid_argument("predict_u: dimension mismatch");
  }
  return K_ALS * xi + k_ALS;
}

AffineLeastSquaresPredictor fit_als(const DataMatrix& data, double tolerance) {
  AffineLeastSquaresPredictor P;
  P.checked = fit_ls(data.augment_ones(), tolerance);
  P.xi_dim = data.w_rows();
  P.u_dim = data.u_rows();
  P.y_dim = data.y_rows();
  // ones row sits first in the checked W, so column 0 carries the offsets
  P.g_ALS = P.checked.G_LS.col(0);
  P.G_ALS = P.checked.G_LS.rightCols(P.xi_dim + P.u_dim);
  P.k_ALS = P.checked.K_LS.col(0);
  P.K_ALS = P.checked.K_LS.rightCols(P.xi_dim);
  return P;
}

VectorXd OffsetPredictor::predict_y(const VectorXd& xi, const VectorXd& u) const {
  return base.predict_y(xi, u) + c_y;
}

OffsetPredictor offset_predictor(const LeastSquaresPredictor& P,
                                 const DataMatrix& data,
                                 const VectorXd& a_bar) {
  if (a_bar.size() != data.cols()) {
    throw std::invalid_argument("offset_predictor: a_bar must have one entry per data column");
  }
  if (P.xi_dim != data.w_rows() || P.u_dim != data.u_rows() ||
      P.y_dim != data.y_rows()) {
    throw std::invalid_argument("offset_predictor: predictor/data mismatch");
  }
  OffsetPredictor O;
  O.base = P;
  O.xi_bar = data.W() * a_bar;
  O.u_bar = data.U() * a_bar;
  O.y_bar = data.Y() * a_bar;
  O.c_y = O.y_bar - P.predict_y(O.xi_bar, O.u_bar);
  return O;
}

}  // namespace ddpc
