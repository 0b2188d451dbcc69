#include "ddpc/implicit_predictor.hpp"

#include <cmath>
#include <stdexcept>

#include "ddpc/linear_core.hpp"

namespace ddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(PredictorVariant v) {
  switch (v) {
    case PredictorVariant::unconstrained: return "unconstrained";
    case PredictorVariant::affine: return "affine";
    case PredictorVariant::offset: return "offset";
    case PredictorVariant::terminal: return "terminal";
  }
  throw std::logic_error("unknown PredictorVariant");
}

VectorXd ImplicitPredictorMap::eval(const VectorXd& xi, const VectorXd& u) const {
  if (xi.size() != M_xi.cols() || u.size() != M_u.cols()) {
    throw std::invalid_argument("ImplicitPredictorMap::eval: dimension mismatch");
  }
  return M_xi * xi + M_u * u + c;
}

namespace {

// Weighed-sum coefficients of the blended prediction. On the explored
// output-deviation subspace V the prediction trades off y_ref against the
// least-squares predictor; in the complement no deviation was ever observed,
// so the prediction is pinned to the predictor (M acts as the identity there).
struct BlendParts {
  MatrixXd M;       // coefficient on y_LS; (lambda Q_reg + Q)^-1 lambda Q_reg when V = I
  MatrixXd to_ref;  // coefficient on y_ref
};

BlendParts blend(const MatrixXd& Q_reg, const MatrixXd& Q, double lambda,
                 const MatrixXd& V) {
  if (lambda < 0.0) throw std::invalid_argument("implicit predictor: lambda must be >= 0");
  const Eigen::Index ny = Q.rows();
  BlendParts parts;
  if (V.cols() == 0) {
    parts.M = MatrixXd::Identity(ny, ny);
    parts.to_ref = MatrixXd::Zero(ny, ny);
    return parts;
  }
  const MatrixXd restricted =
      V.transpose() * (Q + lambda * Q_reg) * V;
  if (numerical_rank(restricted) < restricted.rows()) {
    throw std::invalid_argument(
        "implicit predictor: combined weight lambda*Q_reg + Q is singular on "
        "the explored subspace");
  }
  Eigen::PartialPivLU<MatrixXd> lu(restricted);
  parts.to_ref = V * lu.solve(V.transpose() * Q);
  parts.M = MatrixXd::Identity(ny, ny) - parts.to_ref;
  return parts;
}

}  // namespace

ImplicitPredictorMap implicit_unconstrained(const LeastSquaresPredictor& P,
                                            const MatrixXd& Q,
                                            const VectorXd& y_ref, double lambda) {
  if (Q.rows() != P.y_dim || y_ref.size() != P.y_dim) {
    throw std::invalid_argument("implicit_unconstrained: dimension mismatch");
  }
  BlendParts parts = blend(P.Q_reg, Q, lambda, P.explored_output_basis);
  ImplicitPredictorMap map;
  map.variant = PredictorVariant::unconstrained;
  map.M_xi = parts.M * P.G_xi();
  map.M_u = parts.M * P.G_u();
  map.c = parts.to_ref * y_ref;
  map.lambda = lambda;
  map.Q = Q;
  map.y_ref = y_ref;
  return map;
}

ImplicitPredictorMap implicit_affine(const AffineLeastSquaresPredictor& P,
                                     const MatrixXd& Q, const VectorXd& y_ref,
                                     double lambda) {
  if (Q.rows() != P.y_dim || y_ref.size() != P.y_dim) {
    throw std::invalid_argument("implicit_affine: dimension mismatch");
  }
  BlendParts parts = blend(P.checked.Q_reg, Q, lambda, P.checked.explored_output_basis);
  ImplicitPredictorMap map;
  map.variant = PredictorVariant::affine;
  map.M_xi = parts.M * P.G_ALS.leftCols(P.xi_dim);
  map.M_u = parts.M * P.G_ALS.rightCols(P.u_dim);
  map.c = parts.M * P.g_ALS + parts.to_ref * y_ref;
  map.lambda = lambda;
  map.Q = Q;
  map.y_ref = y_ref;
  return map;
}

ImplicitPredictorMap implicit_offset(const OffsetPredictor& P, const MatrixXd& Q,
                                     const VectorXd& y_ref, double lambda) {
  ImplicitPredictorMap map = implicit_unconstrained(P.base, Q, y_ref, lambda);
  BlendParts parts = blend(P.base.Q_reg, Q, lambda, P.base.explored_output_basis);
  map.variant = PredictorVariant::offset;
  map.c += parts.M * P.c_y;
  return map;
}

std::pair<ImplicitPredictorMap, TerminalWeights> implicit_terminal(
    const LeastSquaresPredictor& P, const ControlObjective& objective,
    double lambda, int n_terminal) {
  if (!objective.q_step_rows.has_value()) {
    throw std::invalid_argument(
        "implicit_terminal: objective must carry the replicated per-step weight "
        "structure; use implicit_terminal_soft for general Q");
  }
  if (lambda <= 0.0) {
    throw std::invalid_argument("implicit_terminal: lambda must be positive");
  }
  const int p = *objective.q_step_rows;
  const int ny = P.y_dim;
  const int k2 = n_terminal * p;
  if (n_terminal < 1 || k2 > ny) {
    throw std::invalid_argument("implicit_terminal: invalid terminal step count");
  }
  const int k1 = ny - k2;
  const MatrixXd& Q = objective.Q;
  const MatrixXd& Q_reg = P.Q_reg;

  const MatrixXd Q1 = Q.topLeftCorner(k1, k1);
  const MatrixXd Qreg11 = Q_reg.topLeftCorner(k1, k1);
  const MatrixXd Qreg12 = Q_reg.topRightCorner(k1, k2);
  const MatrixXd A1 = Q1 + lambda * Qreg11;
  if (k1 > 0 && numerical_rank(A1) < k1) {
    throw std::invalid_argument("implicit_terminal: upper-left combined block singular");
  }

  TerminalWeights weights;
  weights.split = k1;
  weights.Lambda_ref = MatrixXd::Zero(ny, ny);
  weights.Lambda_reg = MatrixXd::Zero(ny, ny);
  weights.Lambda_ref.bottomRightCorner(k2, k2) = MatrixXd::Identity(k2, k2);
  if (k1 > 0) {
    Eigen::PartialPivLU<MatrixXd> lu(A1);
    weights.Lambda_ref.topLeftCorner(k1, k1) = lu.solve(Q1);
    weights.Lambda_ref.topRightCorner(k1, k2) = -lambda * lu.solve(Qreg12);
    weights.Lambda_reg.topLeftCorner(k1, k1) = lambda * lu.solve(Qreg11);
    weights.Lambda_reg.topRightCorner(k1, k2) = lambda * lu.solve(Qreg12);
  }

  ImplicitPredictorMap map;
  map.variant = PredictorVariant::terminal;
  map.M_xi = weights.Lambda_reg * P.G_xi();
  map.M_u = weights.Lambda_reg * P.G_u();
  map.c = weights.Lambda_ref * objective.y_ref;
  map.lambda = lambda;
  map.Q = Q;
  map.y_ref = objective.y_ref;
  map.n_terminal_rows = k2;
  return {map, weights};
}

ImplicitPredictorMap implicit_terminal_soft(const LeastSquaresPredictor& P,
                                            const MatrixXd& Q, const VectorXd& y_ref,
                                            double lambda, int n_terminal_rows,
                                            double q) {
  const int ny = P.y_dim;
  if (n_terminal_rows < 1 || n_terminal_rows > ny) {
    throw std::invalid_argument("implicit_terminal_soft: invalid terminal row count");
  }
  const int k1 = ny - n_terminal_rows;
  MatrixXd Q_q = MatrixXd::Zero(ny, ny);
  Q_q.topLeftCorner(k1, k1) = Q.topLeftCorner(k1, k1);
  Q_q.bottomRightCorner(n_terminal_rows, n_terminal_rows) =
      q * MatrixXd::Identity(n_terminal_rows, n_terminal_rows);
  ImplicitPredictorMap map = implicit_unconstrained(P, Q_q, y_ref, lambda);
  map.variant = PredictorVariant::terminal;
  map.n_terminal_rows = n_terminal_rows;
  map.soft_limit_fallback = true;
  return map;
}

Definition2Report verify_definition2(const ImplicitPredictorMap& map,
                                     const DPCProblem& prob,
                                     const std::vector<VectorXd>& xi_samples,
                                     const std::vector<VectorXd>& u_samples,
                                     double inner_tol, double value_tol,
                                     double minimizer_tol) {
  prob.validate();
  if (prob.constraints.y_box.has_value()) {
    throw std::invalid_argument(
        "verify_definition2: output box constraints are outside the map's "
        "assumptions; remove them or verify per-instance");
  }
  const bool terminal_map = map.variant == PredictorVariant::terminal;
  if (terminal_map != prob.constraints.terminal.has_value()) {
    throw std::invalid_argument(
        "verify_definition2: terminal constraint must be present exactly for "
        "the terminal predictor variant");
  }

  const int ny = prob.data.y_rows();
  const long ell = prob.data.cols();
  RegularizerQuadraticForm qf =
      regularizer_quadratic_form(prob.regularizer, prob.data, prob.tolerance);
  const long na = ell + qf.n_sigma;

  Definition2Report rep;
  rep.inner_tolerance = inner_tol;
  rep.value_tolerance = value_tol;
  rep.minimizer_tolerance = minimizer_tol;

  // (a) inner problem over (y, a): min ||y - y_ref||^2_Q + h(a)
  //     s.t. W a = xi, U a = u, Y a = y (+ terminal rows)
  for (const VectorXd& xi : xi_samples) {
    for (const VectorXd& u : u_samples) {
      MatrixXd H = MatrixXd::Zero(ny + na, ny + na);
      H.topLeftCorner(ny, ny) = 2.0 * prob.objective.Q;
      H.bottomRightCorner(na, na) = qf.H;
      VectorXd g(ny + na);
      g.head(ny) = -2.0 * prob.objective.Q * prob.objective.y_ref;
      g.tail(na) = qf.g;

      const int wr = prob.data.w_rows();
      const int nu = prob.data.u_rows();
      long rows = wr + nu + ny + (prob.regularizer.affine ? 1 : 0) +
                  qf.extra_rows.rows() +
                  (prob.constraints.terminal ? prob.constraints.terminal->selector.rows() : 0);
      MatrixXd A = MatrixXd::Zero(rows, ny + na);
      VectorXd b = VectorXd::Zero(rows);
      long r = 0;
      A.block(r, ny, wr, ell) = prob.data.W();
      if (qf.n_sigma > 0) {
        const auto aug = slack_augment(prob.data, prob.regularizer.lambda,
                                       prob.regularizer.lambda_sigma);
        A.block(r + aug.slack_row_offset, ny + ell, qf.n_sigma, qf.n_sigma) =
            -MatrixXd::Identity(qf.n_sigma, qf.n_sigma);
      }
      b.segment(r, wr) = xi;
      r += wr;
      A.block(r, ny, nu, ell) = prob.data.U();
      b.segment(r, nu) = u;
      r += nu;
      A.block(r, 0, ny, ny) = -MatrixXd::Identity(ny, ny);
      A.block(r, ny, ny, ell) = prob.data.Y();
      r += ny;
      if (prob.regularizer.affine) {
        A.block(r, ny, 1, ell) = Eigen::RowVectorXd::Ones(ell);
        b(r) = 1.0;
        r += 1;
      }
      if (qf.extra_rows.rows() > 0) {
        A.block(r, ny, qf.extra_rows.rows(), ell) = qf.extra_rows;
        b.segment(r, qf.extra_rhs.size()) = qf.extra_rhs;
        r += qf.extra_rows.rows();
      }
      if (prob.constraints.terminal) {
        const auto& t = *prob.constraints.terminal;
        A.block(r, 0, t.selector.rows(), ny) = t.selector;
        b.segment(r, t.target.size()) = t.target;
      }

      KktResult kkt = solve_kkt(H, g, A, b, prob.tolerance);
      const VectorXd y_inner = kkt.x.head(ny);
      const VectorXd y_map = map.eval(xi, u);
      const double err = (y_inner - y_map).norm() / (1.0 + y_map.norm());
      rep.max_inner_error = std::max(rep.max_inner_error, err);
    }
  }

  // (b) re-solve with the map appended as an equality constraint
  for (const VectorXd& xi : xi_samples) {
    DPCProblem prob_xi = prob;
    prob_xi.xi = xi;
    DPCSolution base = solve_full(prob_xi);
    if (base.status != SolveStatus::optimal) {
      throw std::runtime_error("verify_definition2: base problem infeasible");
    }
    DPCSolution pinned = solve_full_with_output_equality(
        prob_xi, -map.M_u, MatrixXd::Identity(ny, ny), map.M_xi * xi + map.c);
    if (pinned.status != SolveStatus::optimal) {
      throw std::runtime_error("verify_definition2: pinned problem infeasible");
    }
    rep.non_unique_encountered |= base.non_unique || pinned.non_unique;
    const double dv = std::abs(base.value - pinned.value) / (1.0 + std::abs(base.value));
    rep.max_value_error = std::max(rep.max_value_error, dv);
    VectorXd m0(base.u.size() + base.y.size());
    m0 << base.u, base.y;
    VectorXd m1(pinned.u.size() + pinned.y.size());
    m1 << pinned.u, pinned.y;
    const double dm = (m0 - m1).norm() / (1.0 + m0.norm());
    rep.max_minimizer_error = std::max(rep.max_minimizer_error, dm);
  }

  rep.samples = static_cast<int>(xi_samples.size());
  rep.passed = rep.max_inner_error <= inner_tol && rep.max_value_error <= value_tol &&
               rep.max_minimizer_error <= minimizer_tol;
  return rep;
}

}  // namespace ddpc
