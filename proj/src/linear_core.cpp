#include "ddpc/linear_core.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace ddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd pinv(const MatrixXd& M, double tolerance, double scale_anchor) {
  if (M.size() == 0) return MatrixXd::Zero(M.cols(), M.rows());
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff =
      tolerance * std::max(s.size() > 0 ? s(0) : 0.0, scale_anchor);
  VectorXd s_inv = VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) s_inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const MatrixXd& M, double tolerance, double scale_anchor) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = tolerance * std::max(s(0), scale_anchor);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

ProjectorPair projectors(const MatrixXd& Z, double tolerance) {
  const Eigen::Index ell = Z.cols();
  ProjectorPair pair;
  if (Z.rows() == 0) {
    pair.Pi = MatrixXd::Zero(ell, ell);
    pair.Pi_perp = MatrixXd::Identity(ell, ell);
    return pair;
  }
  MatrixXd Pi = pinv(Z, tolerance) * Z;
  Pi = 0.5 * (Pi + Pi.transpose());
  pair.Pi = Pi;
  pair.Pi_perp = MatrixXd::Identity(ell, ell) - Pi;
  return pair;
}

LQFactors lq_decompose(const MatrixXd& D, int rows_w, int rows_u, int rows_y,
                       double tolerance) {
  const int rows = static_cast<int>(D.rows());
  const Eigen::Index ell = D.cols();
  if (rows_w + rows_u + rows_y != rows) {
    throw std::invalid_argument("lq_decompose: block rows do not sum to rows of D");
  }
  const int k = static_cast<int>(std::min<Eigen::Index>(ell, rows));

  Eigen::HouseholderQR<MatrixXd> qr(D.transpose());
  MatrixXd thin_q = qr.householderQ() * MatrixXd::Identity(ell, k);
  MatrixXd R = MatrixXd(qr.matrixQR().topRows(k).triangularView<Eigen::Upper>());

  LQFactors f;
  f.rows_w = rows_w;
  f.rows_u = rows_u;
  f.rows_y = rows_y;
  f.L = MatrixXd::Zero(rows, rows);
  f.L.leftCols(k) = R.transpose();
  f.Q = MatrixXd::Zero(rows, ell);
  f.Q.topRows(k) = thin_q.transpose();

  // fix signs so the diagonal of L is nonnegative (deterministic gamma values)
  for (int i = 0; i < k; ++i) {
    if (f.L(i, i) < 0.0) {
      f.L.col(i) = -f.L.col(i);
      f.Q.row(i) = -f.Q.row(i);
    }
  }

  double max_diag = 0.0;
  for (int i = 0; i < rows; ++i) max_diag = std::max(max_diag, std::abs(f.L(i, i)));
  for (int i = 0; i < rows; ++i) {
    if (std::abs(f.L(i, i)) <= tolerance * max_diag) {
      f.diagonal_singular = true;
      break;
    }
  }
  return f;
}

LQFactors lq_decompose(const DataMatrix& data, double tolerance) {
  return lq_decompose(data.D(), data.w_rows(), data.u_rows(), data.y_rows(),
                      tolerance);
}

double weighted_sqnorm(const VectorXd& v, const MatrixXd& Wt) {
  if (Wt.rows() != Wt.cols() || Wt.rows() != v.size()) {
    throw std::invalid_argument("weighted_sqnorm: dimension mismatch");
  }
  const double scale = std::max(1.0, Wt.cwiseAbs().maxCoeff());
  if ((Wt - Wt.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("weighted_sqnorm: weight matrix is not symmetric");
  }
  return v.dot(Wt * v);
}

KktResult solve_kkt(const MatrixXd& H, const VectorXd& g, const MatrixXd& Aeq,
                    const VectorXd& beq, double tolerance) {
  const Eigen::Index nx = H.rows();
  if (H.cols() != nx || g.size() != nx) {
    throw std::invalid_argument("solve_kkt: dimension mismatch in objective");
  }
  if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != nx)) {
    throw std::invalid_argument("solve_kkt: dimension mismatch in constraints");
  }

  KktResult res;
  VectorXd x0;
  MatrixXd nullspace;
  if (Aeq.rows() == 0) {
    x0 = VectorXd::Zero(nx);
    nullspace = MatrixXd::Identity(nx, nx);
  } else {
    Eigen::JacobiSVD<MatrixXd> svd(Aeq, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    const double cutoff = (s.size() > 0 ? s(0) : 0.0) * tolerance;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cutoff) ++rank;
    }
    VectorXd s_inv = VectorXd::Zero(s.size());
    for (int i = 0; i < rank; ++i) s_inv(i) = 1.0 / s(i);
    x0 = svd.matrixV().leftCols(s.size()) * s_inv.asDiagonal() *
         svd.matrixU().leftCols(s.size()).transpose() * beq;
    const double feas = (Aeq * x0 - beq).norm();
    if (feas > tolerance * (1.0 + beq.norm()) * 1e3) {
      throw InfeasibleError("solve_kkt: equality constraints inconsistent, residual " +
                                std::to_string(feas),
                            feas);
    }
    nullspace = svd.matrixV().rightCols(nx - rank);
  }

  VectorXd x = x0;
  if (nullspace.cols() > 0) {
    MatrixXd H_red = nullspace.transpose() * H * nullspace;
    H_red = 0.5 * (H_red + H_red.transpose());
    VectorXd g_red = nullspace.transpose() * (H * x0 + g);
    Eigen::JacobiSVD<MatrixXd> svd_h(H_red, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sh = svd_h.singularValues();
    // anchor the cutoff to the full Hessian's scale: when the restriction of H
    // to the constraint null space vanishes, every reduced singular value is
    // roundoff and must be treated as zero
    const double h_scale =
        std::max(H.size() > 0 ? H.cwiseAbs().maxCoeff() : 0.0,
                 sh.size() > 0 ? sh(0) : 0.0);
    const double cutoff_h = h_scale * tolerance;
    int rank_h = 0;
    for (Eigen::Index i = 0; i < sh.size(); ++i) {
      if (sh(i) > cutoff_h) ++rank_h;
    }
    res.hessian_singular = rank_h < H_red.rows();
    VectorXd sh_inv = VectorXd::Zero(sh.size());
    for (int i = 0; i < rank_h; ++i) sh_inv(i) = 1.0 / sh(i);
    VectorXd v = -(svd_h.matrixV() * sh_inv.asDiagonal() *
                   svd_h.matrixU().transpose() * g_red);
    // for PSD H the reduced system is consistent iff the QP is bounded below
    const double incons = (H_red * v + g_red).norm();
    if (incons > 1e-6 * (1.0 + g_red.norm())) {
      throw std::runtime_error("solve_kkt: objective unbounded below on the feasible set");
    }
    x += nullspace * v;
  }

  res.x = x;
  if (Aeq.rows() > 0) {
    res.multipliers = -pinv(MatrixXd(Aeq.transpose()), tolerance) * (H * x + g);
    res.stationarity_residual =
        (H * x + g + Aeq.transpose() * res.multipliers).norm();
    res.feasibility_residual = (Aeq * x - beq).norm();
  } else {
    res.multipliers = VectorXd::Zero(0);
    res.stationarity_residual = (H * x + g).norm();
    res.feasibility_residual = 0.0;
  }
  return res;
}

}  // namespace ddpc
