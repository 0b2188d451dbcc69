#include "ddpc/ocp_solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddpc/linear_core.hpp"

namespace ddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_psd(const MatrixXd& M, const std::string& name) {
  if (M.rows() != M.cols()) throw std::invalid_argument(name + " must be square");
  const double scale = std::max(1.0, M.size() > 0 ? M.cwiseAbs().maxCoeff() : 0.0);
  if (M.size() > 0 && (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument(name + " must be symmetric");
  }
  if (M.size() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
      throw std::invalid_argument(name + " must be positive semidefinite");
    }
  }
}
}  // namespace

ControlObjective ControlObjective::tracking(const MatrixXd& Q_step, int N_f,
                                            VectorXd y_ref, MatrixXd R_u,
                                            VectorXd u_ref) {
  if (Q_step.rows() != Q_step.cols()) {
    throw std::invalid_argument("tracking: Q_step must be square");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Q_step);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("tracking: per-step weight must be positive definite");
  }
  const int p = static_cast<int>(Q_step.rows());
  ControlObjective obj;
  obj.Q = MatrixXd::Zero(p * N_f, p * N_f);
  for (int i = 0; i < N_f; ++i) obj.Q.block(i * p, i * p, p, p) = Q_step;
  obj.y_ref = std::move(y_ref);
  obj.R_u = std::move(R_u);
  obj.u_ref = std::move(u_ref);
  obj.q_step_rows = p;
  return obj;
}

double ControlObjective::eval(const VectorXd& u, const VectorXd& y) const {
  const VectorXd dy = y - y_ref;
  const VectorXd du = u - u_ref;
  return dy.dot(Q * dy) + du.dot(R_u * du);
}

void ControlObjective::validate(int u_dim, int y_dim) const {
  if (Q.rows() != y_dim || y_ref.size() != y_dim) {
    throw std::invalid_argument("ControlObjective: output dimension mismatch");
  }
  if (R_u.rows() != u_dim || u_ref.size() != u_dim) {
    throw std::invalid_argument("ControlObjective: input dimension mismatch");
  }
  check_psd(Q, "Q");
  check_psd(R_u, "R_u");
}

void Box::validate() const {
  if (lo.size() != hi.size()) throw std::invalid_argument("Box: size mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (lo(i) > hi(i)) throw std::invalid_argument("Box: lower bound exceeds upper bound");
  }
}

bool Box::contains(const VectorXd& v, double tol) const {
  if (v.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double slack = tol * (1.0 + std::max(std::abs(lo(i)), std::abs(hi(i))));
    if (v(i) < lo(i) - slack || v(i) > hi(i) + slack) return false;
  }
  return true;
}

TerminalEquality TerminalEquality::last_steps(int steps, int block_rows,
                                              int y_dim, const VectorXd& y_ref) {
  const int k = steps * block_rows;
  if (k < 1 || k > y_dim || y_ref.size() != y_dim) {
    throw std::invalid_argument("TerminalEquality: invalid step count");
  }
  TerminalEquality t;
  t.selector = MatrixXd::Zero(k, y_dim);
  t.selector.rightCols(k) = MatrixXd::Identity(k, k);
  t.target = y_ref.tail(k);
  return t;
}

bool Polyhedron::contains(const VectorXd& v, double tol) const {
  if (A.cols() != v.size()) return false;
  const VectorXd r = A * v - b;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r(i) > tol * (1.0 + std::abs(b(i)))) return false;
  }
  return true;
}

Polyhedron Polyhedron::box(const VectorXd& lo, const VectorXd& hi) {
  const Eigen::Index n = lo.size();
  std::vector<std::pair<VectorXd, double>> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(hi(i))) {
      VectorXd row = VectorXd::Zero(n);
      row(i) = 1.0;
      rows.emplace_back(row, hi(i));
    }
    if (std::isfinite(lo(i))) {
      VectorXd row = VectorXd::Zero(n);
      row(i) = -1.0;
      rows.emplace_back(row, -lo(i));
    }
  }
  Polyhedron P;
  P.A = MatrixXd::Zero(rows.size(), n);
  P.b = VectorXd::Zero(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    P.A.row(static_cast<Eigen::Index>(i)) = rows[i].first.transpose();
    P.b(static_cast<Eigen::Index>(i)) = rows[i].second;
  }
  return P;
}

void DPCProblem::validate() const {
  if (xi.size() != data.w_rows()) {
    throw std::invalid_argument("DPCProblem: xi dimension mismatch");
  }
  objective.validate(data.u_rows(), data.y_rows());
  regularizer.validate(data.cols());
  if (constraints.u_box) {
    constraints.u_box->validate();
    if (constraints.u_box->lo.size() != data.u_rows()) {
      throw std::invalid_argument("DPCProblem: u_box dimension mismatch");
    }
  }
  if (constraints.y_box) {
    constraints.y_box->validate();
    if (constraints.y_box->lo.size() != data.y_rows()) {
      throw std::invalid_argument("DPCProblem: y_box dimension mismatch");
    }
  }
  if (constraints.terminal) {
    const auto& t = *constraints.terminal;
    if (t.selector.cols() != data.y_rows() || t.target.size() != t.selector.rows()) {
      throw std::invalid_argument("DPCProblem: terminal constraint dimension mismatch");
    }
    if (numerical_rank(t.selector, tolerance) != t.selector.rows()) {
      throw std::invalid_argument("DPCProblem: terminal selector rows must be independent");
    }
  }
}

std::string to_string(SolveStatus status) {
  return status == SolveStatus::optimal ? "optimal" : "infeasible";
}

namespace {

struct BoxQpResult {
  VectorXd x;
  std::vector<int> active;
  int iterations = 0;
  bool hessian_singular = false;
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

double box_violation(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    v = std::max(v, lo(i) - x(i));
    v = std::max(v, x(i) - hi(i));
  }
  return v;
}

// feasible point for {Aeq x = beq} intersected with the box, via alternating
// projections; throws InfeasibleError when the residual does not vanish
VectorXd phase1_point(const MatrixXd& Aeq, const VectorXd& beq,
                      const VectorXd& lo, const VectorXd& hi, VectorXd x,
                      double tolerance) {
  const MatrixXd At_pinv =
      Aeq.rows() > 0 ? pinv(MatrixXd(Aeq), tolerance) : MatrixXd();
  const double scale = 1.0 + (beq.size() > 0 ? beq.cwiseAbs().maxCoeff() : 0.0);
  double viol = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    x = x.cwiseMax(lo).cwiseMin(hi);
    if (Aeq.rows() > 0) x -= At_pinv * (Aeq * x - beq);
    viol = box_violation(x, lo, hi);
    const double eq_res = Aeq.rows() > 0 ? (Aeq * x - beq).cwiseAbs().maxCoeff() : 0.0;
    if (viol <= 1e-10 * scale && eq_res <= 1e-9 * scale) {
      return x.cwiseMax(lo).cwiseMin(hi);
    }
  }
  throw InfeasibleError(
      "no point satisfies the equality constraints within the bounds, violation " +
          std::to_string(viol),
      viol);
}

// Primal active-set method for min 0.5 x'Hx + g'x s.t. Aeq x = beq, lo<=x<=hi.
// Working-set changes use Bland's smallest-index rule.
BoxQpResult solve_box_qp(const MatrixXd& H, const VectorXd& g, const MatrixXd& Aeq,
                         const VectorXd& beq, const VectorXd& lo, const VectorXd& hi,
                         double tolerance) {
  const Eigen::Index nx = H.rows();
  BoxQpResult res;

  bool has_bounds = false;
  for (Eigen::Index i = 0; i < nx; ++i) {
    if (std::isfinite(lo(i)) || std::isfinite(hi(i))) {
      has_bounds = true;
      break;
    }
  }

  KktResult base = solve_kkt(H, g, Aeq, beq, tolerance);
  if (!has_bounds || box_violation(base.x, lo, hi) <= 0.0) {
    res.x = base.x;
    res.hessian_singular = base.hessian_singular;
    res.stationarity = base.stationarity_residual;
    res.feasibility = std::max(base.feasibility_residual,
                               box_violation(base.x, lo, hi));
    return res;
  }

  VectorXd x = phase1_point(Aeq, beq, lo, hi, base.x, tolerance);
  const double bound_scale =
      1.0 + std::max(x.cwiseAbs().maxCoeff(),
                     beq.size() > 0 ? beq.cwiseAbs().maxCoeff() : 0.0);
  const double act_tol = 1e-9 * bound_scale;

  // working set: -1 free, 0 at lower, 1 at upper
  std::vector<int> side(nx, -1);
  for (Eigen::Index i = 0; i < nx; ++i) {
    if (std::isfinite(lo(i)) && x(i) - lo(i) <= act_tol) side[i] = 0;
    else if (std::isfinite(hi(i)) && hi(i) - x(i) <= act_tol) side[i] = 1;
  }

  const int max_iters = 60 * static_cast<int>(nx + 5);
  KktResult kkt;
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    std::vector<int> ws;
    for (Eigen::Index i = 0; i < nx; ++i) {
      if (side[i] >= 0) ws.push_back(static_cast<int>(i));
    }
    MatrixXd A_ws(Aeq.rows() + ws.size(), nx);
    VectorXd b_ws(A_ws.rows());
    A_ws.topRows(Aeq.rows()) = Aeq;
    b_ws.head(Aeq.rows()) = beq;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      const int i = ws[k];
      A_ws.row(Aeq.rows() + static_cast<Eigen::Index>(k)).setZero();
      A_ws(Aeq.rows() + static_cast<Eigen::Index>(k), i) = 1.0;
      b_ws(Aeq.rows() + static_cast<Eigen::Index>(k)) = side[i] == 0 ? lo(i) : hi(i);
    }

    kkt = solve_kkt(H, g, A_ws, b_ws, tolerance);
    const VectorXd d = kkt.x - x;

    if (d.cwiseAbs().maxCoeff() <= 1e-11 * bound_scale) {
      // x solves the working-set problem; check bound multiplier signs
      int drop = -1;
      const double mult_tol = 1e-10 * (1.0 + g.cwiseAbs().maxCoeff());
      for (std::size_t k = 0; k < ws.size(); ++k) {
        const double mu = kkt.multipliers(Aeq.rows() + static_cast<Eigen::Index>(k));
        const bool wrong_sign = side[ws[k]] == 1 ? mu < -mult_tol : mu > mult_tol;
        if (wrong_sign) {
          drop = ws[k];
          break;  // smallest index first: ws ascends by construction
        }
      }
      if (drop < 0) {
        res.x = x;
        res.hessian_singular = kkt.hessian_singular;
        res.stationarity = kkt.stationarity_residual;
        res.feasibility = std::max((Aeq.rows() > 0 ? (Aeq * x - beq).norm() : 0.0),
                                   box_violation(x, lo, hi));
        double compl_max = 0.0;
        for (std::size_t k = 0; k < ws.size(); ++k) {
          const int i = ws[k];
          const double mu = kkt.multipliers(Aeq.rows() + static_cast<Eigen::Index>(k));
          const double slack = side[i] == 0 ? x(i) - lo(i) : hi(i) - x(i);
          compl_max = std::max(compl_max, std::abs(mu * slack));
          res.active.push_back(i);
        }
        res.complementarity = compl_max;
        return res;
      }
      side[drop] = -1;
      continue;
    }

    // longest feasible step along d; blocking bound with the smallest index
    double alpha = 1.0;
    int blocking = -1;
    int blocking_side = -1;
    for (Eigen::Index i = 0; i < nx; ++i) {
      if (side[i] >= 0) continue;
      const double di = d(i);
      if (di > 1e-14 * bound_scale && std::isfinite(hi(i))) {
        const double a_i = (hi(i) - x(i)) / di;
        if (a_i < alpha - 1e-14) {
          alpha = std::max(0.0, a_i);
          blocking = static_cast<int>(i);
          blocking_side = 1;
        }
      } else if (di < -1e-14 * bound_scale && std::isfinite(lo(i))) {
        const double a_i = (lo(i) - x(i)) / di;
        if (a_i < alpha - 1e-14) {
          alpha = std::max(0.0, a_i);
          blocking = static_cast<int>(i);
          blocking_side = 0;
        }
      }
    }
    x += alpha * d;
    if (blocking >= 0) {
      side[blocking] = blocking_side;
      x(blocking) = blocking_side == 0 ? lo(blocking) : hi(blocking);
    }
  }
  throw std::runtime_error("solve_box_qp: active-set iteration limit reached");
}

struct AssembledQp {
  MatrixXd H;
  VectorXd g;
  MatrixXd Aeq;
  VectorXd beq;
  VectorXd lo;
  VectorXd hi;
  int nu = 0;
  int ny = 0;
  long na = 0;  // generator (+ slack) variables; 0 in the reduced problem
};

void append_rows(MatrixXd& A, VectorXd& b, const MatrixXd& rows, const VectorXd& rhs) {
  const Eigen::Index old_rows = A.rows();
  A.conservativeResize(old_rows + rows.rows(), Eigen::NoChange);
  A.bottomRows(rows.rows()) = rows;
  b.conservativeResize(old_rows + rhs.size());
  b.tail(rhs.size()) = rhs;
}

void apply_boxes(AssembledQp& qp, const ConstraintSet& cons) {
  const Eigen::Index nx = qp.H.rows();
  qp.lo = VectorXd::Constant(nx, -kInf);
  qp.hi = VectorXd::Constant(nx, kInf);
  if (cons.u_box) {
    qp.lo.segment(0, qp.nu) = cons.u_box->lo;
    qp.hi.segment(0, qp.nu) = cons.u_box->hi;
  }
  if (cons.y_box) {
    qp.lo.segment(qp.nu, qp.ny) = cons.y_box->lo;
    qp.hi.segment(qp.nu, qp.ny) = cons.y_box->hi;
  }
}

AssembledQp assemble_full(const DPCProblem& prob,
                          const RegularizerQuadraticForm& qf) {
  const DataMatrix& data = prob.data;
  const int nu = data.u_rows();
  const int ny = data.y_rows();
  const long ell = data.cols();
  const long na = ell + qf.n_sigma;
  const long nx = nu + ny + na;

  AssembledQp qp;
  qp.nu = nu;
  qp.ny = ny;
  qp.na = na;
  qp.H = MatrixXd::Zero(nx, nx);
  qp.H.block(0, 0, nu, nu) = 2.0 * prob.objective.R_u;
  qp.H.block(nu, nu, ny, ny) = 2.0 * prob.objective.Q;
  qp.H.block(nu + ny, nu + ny, na, na) = qf.H;
  qp.g = VectorXd::Zero(nx);
  qp.g.segment(0, nu) = -2.0 * prob.objective.R_u * prob.objective.u_ref;
  qp.g.segment(nu, ny) = -2.0 * prob.objective.Q * prob.objective.y_ref;
  qp.g.segment(nu + ny, na) = qf.g;

  const int wr = data.w_rows();
  MatrixXd A = MatrixXd::Zero(wr + nu + ny, nx);
  VectorXd b = VectorXd::Zero(wr + nu + ny);
  A.block(0, nu + ny, wr, ell) = data.W();
  b.head(wr) = prob.xi;
  if (qf.n_sigma > 0) {
    const auto aug = slack_augment(data, prob.regularizer.lambda,
                                   prob.regularizer.lambda_sigma);
    A.block(aug.slack_row_offset, nu + ny + ell, qf.n_sigma, qf.n_sigma) =
        -MatrixXd::Identity(qf.n_sigma, qf.n_sigma);
  }
  A.block(wr, 0, nu, nu) = -MatrixXd::Identity(nu, nu);
  A.block(wr, nu + ny, nu, ell) = data.U();
  A.block(wr + nu, nu, ny, ny) = -MatrixXd::Identity(ny, ny);
  A.block(wr + nu, nu + ny, ny, ell) = data.Y();
  qp.Aeq = A;
  qp.beq = b;

  if (prob.regularizer.affine) {
    MatrixXd row = MatrixXd::Zero(1, nx);
    row.block(0, nu + ny, 1, ell) = Eigen::RowVectorXd::Ones(ell);
    append_rows(qp.Aeq, qp.beq, row, VectorXd::Ones(1));
  }
  if (qf.extra_rows.size() > 0) {
    MatrixXd rows = MatrixXd::Zero(qf.extra_rows.rows(), nx);
    rows.block(0, nu + ny, qf.extra_rows.rows(), ell) = qf.extra_rows;
    append_rows(qp.Aeq, qp.beq, rows, qf.extra_rhs);
  }
  if (prob.constraints.terminal) {
    const auto& t = *prob.constraints.terminal;
    MatrixXd rows = MatrixXd::Zero(t.selector.rows(), nx);
    rows.block(0, nu, t.selector.rows(), ny) = t.selector;
    append_rows(qp.Aeq, qp.beq, rows, t.target);
  }
  apply_boxes(qp, prob.constraints);
  return qp;
}

double regularizer_value(const RegularizerQuadraticForm& qf, const VectorXd& a_sig) {
  return 0.5 * a_sig.dot(qf.H * a_sig) + qf.g.dot(a_sig) + qf.constant;
}

DPCSolution finish_solution(const DPCProblem& prob, const BoxQpResult& qp_res,
                            const VectorXd& u, const VectorXd& y, const VectorXd& a,
                            const VectorXd& sigma, double h_value) {
  DPCSolution sol;
  sol.u = u;
  sol.y = y;
  sol.a = a;
  sol.sigma = sigma;
  sol.status = SolveStatus::optimal;
  sol.value = prob.objective.eval(u, y) + h_value;
  sol.active_set = qp_res.active;
  sol.non_unique = qp_res.hessian_singular;
  sol.diagnostics.stationarity = qp_res.stationarity;
  sol.diagnostics.feasibility = qp_res.feasibility;
  sol.diagnostics.complementarity = qp_res.complementarity;
  sol.diagnostics.active_set_iterations = qp_res.iterations;
  return sol;
}

DPCSolution infeasible_solution(const InfeasibleError& err) {
  DPCSolution sol;
  sol.status = SolveStatus::infeasible;
  sol.value = std::numeric_limits<double>::quiet_NaN();
  sol.infeasibility_residual = err.residual();
  return sol;
}

}  // namespace

namespace {

DPCSolution solve_full_impl(const DPCProblem& prob, const MatrixXd* E_u,
                            const MatrixXd* E_y, const VectorXd* extra_rhs) {
  prob.validate();
  RegularizerQuadraticForm qf =
      regularizer_quadratic_form(prob.regularizer, prob.data, prob.tolerance);
  AssembledQp qp = assemble_full(prob, qf);
  if (E_u != nullptr) {
    MatrixXd rows = MatrixXd::Zero(E_u->rows(), qp.H.rows());
    rows.block(0, 0, E_u->rows(), qp.nu) = *E_u;
    rows.block(0, qp.nu, E_y->rows(), qp.ny) = *E_y;
    append_rows(qp.Aeq, qp.beq, rows, *extra_rhs);
  }
  BoxQpResult qp_res;
  try {
    qp_res = solve_box_qp(qp.H, qp.g, qp.Aeq, qp.beq, qp.lo, qp.hi, prob.tolerance);
  } catch (const InfeasibleError& err) {
    return infeasible_solution(err);
  }
  const VectorXd u = qp_res.x.segment(0, qp.nu);
  const VectorXd y = qp_res.x.segment(qp.nu, qp.ny);
  const VectorXd a_sig = qp_res.x.tail(qp.na);
  const VectorXd a = a_sig.head(prob.data.cols());
  const VectorXd sigma = a_sig.tail(qf.n_sigma);
  return finish_solution(prob, qp_res, u, y, a, sigma, regularizer_value(qf, a_sig));
}

}  // namespace

DPCSolution solve_full(const DPCProblem& prob) {
  return solve_full_impl(prob, nullptr, nullptr, nullptr);
}

DPCSolution solve_full_with_output_equality(const DPCProblem& prob,
                                            const MatrixXd& E_u,
                                            const MatrixXd& E_y,
                                            const VectorXd& rhs) {
  if (E_u.rows() != E_y.rows() || E_u.rows() != rhs.size() ||
      E_u.cols() != prob.data.u_rows() || E_y.cols() != prob.data.y_rows()) {
    throw std::invalid_argument("solve_full_with_output_equality: dimension mismatch");
  }
  return solve_full_impl(prob, &E_u, &E_y, &rhs);
}

namespace {

// quadratic form of J + h*(xi, u, y) over x = (u; y)
struct ReducedForm {
  MatrixXd H;
  VectorXd g;
  double c0 = 0.0;
  MatrixXd extra_eq_A;  // gamma_3 = 0 hard constraint
  VectorXd extra_eq_b;
};

void add_weighted_residual(ReducedForm& rf, double weight, const MatrixXd& A,
                           const VectorXd& b, const MatrixXd& Wt) {
  if (weight == 0.0) return;
  const MatrixXd WA = Wt * A;
  rf.H += 2.0 * weight * A.transpose() * WA;
  rf.g += 2.0 * weight * A.transpose() * (Wt * b);
  rf.c0 += weight * b.dot(Wt * b);
}

ReducedForm build_reduced(const DPCProblem& prob) {
  const DataMatrix& data = prob.data;
  const Regularizer& reg = prob.regularizer;
  const int nu = data.u_rows();
  const int ny = data.y_rows();
  const int nx = nu + ny;
  const VectorXd& xi = prob.xi;

  if (!reg.has_closed_form()) {
    throw std::invalid_argument(
        "solve_reduced: no closed-form trajectory cost for this regularizer");
  }

  ReducedForm rf;
  rf.H = MatrixXd::Zero(nx, nx);
  rf.g = VectorXd::Zero(nx);

  // y-residual map r_y = y - G_u u - (G_xi xi + const) and u-residual map
  auto make_Ay = [&](const MatrixXd& G_u_mat) {
    MatrixXd A = MatrixXd::Zero(ny, nx);
    A.block(0, 0, ny, nu) = -G_u_mat;
    A.block(0, nu, ny, ny) = MatrixXd::Identity(ny, ny);
    return A;
  };
  auto make_Au = [&]() {
    MatrixXd A = MatrixXd::Zero(nu, nx);
    A.block(0, 0, nu, nu) = MatrixXd::Identity(nu, nu);
    return A;
  };

  double wy = 0.0, wu = 0.0, wxi = 0.0;
  switch (reg.kind) {
    case RegKind::quadratic:
    case RegKind::offset_quadratic:
    case RegKind::slack_quadratic:
      wy = wu = wxi = reg.lambda;
      break;
    case RegKind::projection_perp:
      wy = reg.lambda;
      break;
    case RegKind::projection_par:
      wu = reg.lambda;
      wxi = reg.lambda;
      break;
    case RegKind::mixed_projection:
      wy = reg.lambda3;
      wu = reg.lambda2;
      wxi = reg.lambda2;
      break;
    case RegKind::gamma_ddpc:
      wy = reg.gamma3_zero ? 0.0 : reg.lambda3;
      wu = reg.lambda2;
      break;
    case RegKind::general_weighted:
      throw std::logic_error("unreachable");
  }

  if (reg.affine) {
    AffineLeastSquaresPredictor P = fit_als(data, prob.tolerance);
    VectorXd by = -(P.G_ALS.leftCols(P.xi_dim) * xi + P.g_ALS);
    VectorXd bu = -(P.K_ALS * xi + P.k_ALS);
    add_weighted_residual(rf, wy, make_Ay(P.G_ALS.rightCols(nu)), by, P.checked.Q_reg);
    add_weighted_residual(rf, wu, make_Au(), bu, P.checked.R_reg);
    if (wxi > 0.0) {
      VectorXd xi_checked(xi.size() + 1);
      xi_checked << 1.0, xi;
      rf.c0 += wxi * weighted_sqnorm(xi_checked, P.checked.WWt_inv);
    }
    return rf;
  }

  if (reg.kind == RegKind::slack_quadratic) {
    SlackAugmentation aug = slack_augment(data, reg.lambda, reg.lambda_sigma);
    LeastSquaresPredictor P = fit_ls(aug.data, prob.tolerance);
    add_weighted_residual(rf, wy, make_Ay(P.G_u()), -(P.G_xi() * xi), P.Q_reg);
    add_weighted_residual(rf, wu, make_Au(), -(P.K_LS * xi), P.R_reg);
    rf.c0 += wxi * weighted_sqnorm(xi, P.WWt_inv);
    return rf;
  }

  LeastSquaresPredictor P = fit_ls(data, prob.tolerance);
  VectorXd by = -(P.G_xi() * xi);
  VectorXd bu = -(P.K_LS * xi);
  VectorXd xi_eff = xi;
  if (reg.kind == RegKind::offset_quadratic) {
    const VectorXd xi_bar = data.W() * reg.a_bar;
    const VectorXd u_bar = data.U() * reg.a_bar;
    const VectorXd y_bar = data.Y() * reg.a_bar;
    by -= y_bar - P.predict_y(xi_bar, u_bar);  // shift by c_y
    bu -= u_bar - P.predict_u(xi_bar);
    xi_eff = xi - xi_bar;
  }
  add_weighted_residual(rf, wy, make_Ay(P.G_u()), by, P.Q_reg);
  add_weighted_residual(rf, wu, make_Au(), bu, P.R_reg);
  if (wxi > 0.0) rf.c0 += wxi * weighted_sqnorm(xi_eff, P.WWt_inv);

  if (reg.kind == RegKind::gamma_ddpc && reg.gamma3_zero) {
    rf.extra_eq_A = make_Ay(P.G_u());
    rf.extra_eq_b = -by;
  }
  return rf;
}

}  // namespace

DPCSolution solve_reduced(const DPCProblem& prob) {
  prob.validate();
  const int nu = prob.data.u_rows();
  const int ny = prob.data.y_rows();
  ReducedForm rf = build_reduced(prob);

  AssembledQp qp;
  qp.nu = nu;
  qp.ny = ny;
  qp.na = 0;
  qp.H = rf.H;
  qp.H.block(0, 0, nu, nu) += 2.0 * prob.objective.R_u;
  qp.H.block(nu, nu, ny, ny) += 2.0 * prob.objective.Q;
  qp.g = rf.g;
  qp.g.segment(0, nu) -= 2.0 * prob.objective.R_u * prob.objective.u_ref;
  qp.g.segment(nu, ny) -= 2.0 * prob.objective.Q * prob.objective.y_ref;
  qp.Aeq = MatrixXd::Zero(0, nu + ny);
  qp.beq = VectorXd::Zero(0);
  if (rf.extra_eq_A.size() > 0) {
    append_rows(qp.Aeq, qp.beq, rf.extra_eq_A, rf.extra_eq_b);
  }
  if (prob.constraints.terminal) {
    const auto& t = *prob.constraints.terminal;
    MatrixXd rows = MatrixXd::Zero(t.selector.rows(), nu + ny);
    rows.block(0, nu, t.selector.rows(), ny) = t.selector;
    append_rows(qp.Aeq, qp.beq, rows, t.target);
  }
  apply_boxes(qp, prob.constraints);

  BoxQpResult qp_res;
  try {
    qp_res = solve_box_qp(qp.H, qp.g, qp.Aeq, qp.beq, qp.lo, qp.hi, prob.tolerance);
  } catch (const InfeasibleError& err) {
    return infeasible_solution(err);
  }
  const VectorXd u = qp_res.x.segment(0, nu);
  const VectorXd y = qp_res.x.segment(nu, ny);

  // reconstruct the generator as the inner-problem minimizer
  TrajectoryTuple w{prob.xi, u, y};
  DPCSolution sol;
  try {
    BruteForceResult bf =
        brute_force_cost(prob.regularizer, prob.data, w, false, prob.tolerance);
    sol = finish_solution(prob, qp_res, u, y, bf.a, bf.sigma, bf.cost);
  } catch (const InfeasibleError& err) {
    return infeasible_solution(err);
  }
  return sol;
}

FeasibilityReport feasible(const DPCProblem& prob) {
  prob.validate();
  FeasibilityReport rep;

  rep.boxes_nonempty = true;  // validated lo <= hi above
  rep.terminal_consistent = true;
  if (prob.constraints.terminal) {
    const auto& t = *prob.constraints.terminal;
    const int ny = prob.data.y_rows();
    VectorXd lo = VectorXd::Constant(ny, -kInf);
    VectorXd hi = VectorXd::Constant(ny, kInf);
    if (prob.constraints.y_box) {
      lo = prob.constraints.y_box->lo;
      hi = prob.constraints.y_box->hi;
    }
    try {
      phase1_point(t.selector, t.target, lo, hi, VectorXd::Zero(ny), prob.tolerance);
    } catch (const InfeasibleError&) {
      rep.terminal_consistent = false;
      rep.reason = "terminal equality conflicts with the output box";
      return rep;
    }
  }

  if (prob.constraints.xi_set) {
    rep.xi_set_checked = true;
    rep.xi_in_state_set = prob.constraints.xi_set->contains(prob.xi);
    if (!rep.xi_in_state_set) {
      rep.reason = "xi violates the state constraint set";
      return rep;
    }
  }

  // slack augmentation restores full row rank of the W block by construction
  const bool slack = prob.regularizer.kind == RegKind::slack_quadratic;
  const DataMatrix* data = &prob.data;
  std::optional<SlackAugmentation> aug;
  if (slack) {
    aug = slack_augment(prob.data, prob.regularizer.lambda,
                        prob.regularizer.lambda_sigma);
    data = &aug->data;
  }
  const int rank_D = numerical_rank(data->D(), prob.tolerance);
  rep.full_row_rank = rank_D == data->total_rows();
  if (rep.full_row_rank) {
    rep.feasible = true;
    return rep;
  }

  rep.checked_xi_image = true;
  const MatrixXd& W = data->W();
  const VectorXd proj = W * (pinv(W, prob.tolerance) * prob.xi);
  rep.xi_image_residual = (proj - prob.xi).norm();
  rep.feasible = rep.xi_image_residual <= 1e-8 * (1.0 + prob.xi.norm());
  if (!rep.feasible) {
    rep.reason = "xi is not in the column space of W, residual " +
                 std::to_string(rep.xi_image_residual);
  }
  return rep;
}

ClosedLoopStep closed_loop_step(const DPCProblem& prob, const SystemModel& plant,
                                const VectorXd& plant_state,
                                std::uint64_t rng_seed) {
  const int m = plant.m();
  if (prob.data.u_rows() < m || m < 1) {
    throw std::invalid_argument("closed_loop_step: empty input horizon");
  }
  DPCSolution sol = solve_full(prob);
  if (sol.status != SolveStatus::optimal) {
    throw InfeasibleError("closed_loop_step: OCP infeasible",
                          sol.infeasibility_residual);
  }
  ClosedLoopStep step;
  step.applied_input = sol.u.head(m);
  SimResult sim = simulate(plant, plant_state, step.applied_input, rng_seed);
  step.next_plant_state = sim.x_true.col(1);
  step.solution = std::move(sol);

  const Dims& dims = prob.data.dims();
  if (dims.mode == DataMode::statespace) {
    step.next_xi = sim.x.col(1);
  } else {
    const int mu = dims.m, py = dims.p, Np = dims.N_p;
    VectorXd next(prob.xi.size());
    // shift the past-input block and append the applied input
    next.head(mu * (Np - 1)) = prob.xi.segment(mu, mu * (Np - 1));
    next.segment(mu * (Np - 1), mu) = step.applied_input;
    // shift the past-output block and append the measured output
    const int y_off = mu * Np;
    next.segment(y_off, py * (Np - 1)) = prob.xi.segment(y_off + py, py * (Np - 1));
    next.tail(py) = sim.y.col(0);
    step.next_xi = next;
  }
  return step;
}

ClosedLoopStep closed_loop_step(const DPCProblem& prob, const SystemModel& plant,
                                std::uint64_t rng_seed) {
  if (prob.data.dims().mode != DataMode::statespace) {
    throw std::invalid_argument(
        "closed_loop_step: io mode requires an explicit plant state");
  }
  return closed_loop_step(prob, plant, prob.xi, rng_seed);
}

}  // namespace ddpc
