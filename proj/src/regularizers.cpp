#include "ddpc/regularizers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::quadratic: return "quadratic";
    case RegKind::projection_perp: return "projperp";
    case RegKind::projection_par: return "projpar";
    case RegKind::mixed_projection: return "mixed";
    case RegKind::offset_quadratic: return "offset";
    case RegKind::gamma_ddpc: return "gamma";
    case RegKind::slack_quadratic: return "slack";
    case RegKind::general_weighted: return "general";
  }
  throw std::logic_error("unknown RegKind");
}

Regularizer Regularizer::quadratic(double lambda) {
  Regularizer r;
  r.kind = RegKind::quadratic;
  r.lambda = lambda;
  return r;
}

Regularizer Regularizer::projection_perp(double lambda) {
  Regularizer r;
  r.kind = RegKind::projection_perp;
  r.lambda = lambda;
  return r;
}

Regularizer Regularizer::projection_par(double lambda) {
  Regularizer r;
  r.kind = RegKind::projection_par;
  r.lambda = lambda;
  return r;
}

Regularizer Regularizer::mixed(double l2, double l3) {
  Regularizer r;
  r.kind = RegKind::mixed_projection;
  r.lambda2 = l2;
  r.lambda3 = l3;
  return r;
}

Regularizer Regularizer::offset(double lambda, VectorXd a_bar) {
  Regularizer r;
  r.kind = RegKind::offset_quadratic;
  r.lambda = lambda;
  r.a_bar = std::move(a_bar);
  return r;
}

Regularizer Regularizer::gamma(double l2, double l3, bool gamma3_zero) {
  Regularizer r;
  r.kind = RegKind::gamma_ddpc;
  r.lambda2 = l2;
  r.lambda3 = l3;
  r.gamma3_zero = gamma3_zero;
  return r;
}

Regularizer Regularizer::slack(double lambda, double lambda_sigma) {
  Regularizer r;
  r.kind = RegKind::slack_quadratic;
  r.lambda = lambda;
  r.lambda_sigma = lambda_sigma;
  return r;
}

Regularizer Regularizer::general(MatrixXd S) {
  Regularizer r;
  r.kind = RegKind::general_weighted;
  r.S = std::move(S);
  return r;
}

void Regularizer::validate(long ell) const {
  if (lambda < 0.0 || lambda2 < 0.0 || lambda3 < 0.0 || lambda_sigma < 0.0) {
    throw std::invalid_argument("Regularizer: weights must be nonnegative");
  }
  if (gamma3_zero && kind != RegKind::gamma_ddpc) {
    throw std::invalid_argument("Regularizer: gamma3_zero only applies to the gamma variant");
  }
  if (affine && kind != RegKind::quadratic && kind != RegKind::projection_perp &&
      kind != RegKind::projection_par && kind != RegKind::mixed_projection &&
      kind != RegKind::general_weighted) {
    throw std::invalid_argument("Regularizer: affine mode not supported for " +
                                to_string(kind));
  }
  if (kind == RegKind::offset_quadratic && a_bar.size() != ell) {
    throw std::invalid_argument("Regularizer: a_bar must have one entry per data column");
  }
  if (kind == RegKind::general_weighted) {
    if (S.rows() != ell || S.cols() != ell) {
      throw std::invalid_argument("Regularizer: S must be ell x ell");
    }
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw std::invalid_argument("Regularizer: S must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
      throw std::invalid_argument("Regularizer: S must be positive semidefinite");
    }
  }
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_number_list(const std::string& s, char sep) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    vals.push_back(std::stod(item));
  }
  return vals;
}

// value syntax: "@file.csv" (comma/newline separated) or "[v1;v2;...]"
VectorXd parse_vector_value(const std::string& value) {
  std::vector<double> vals;
  if (!value.empty() && value.front() == '@') {
    std::ifstream in(value.substr(1));
    if (!in) throw std::invalid_argument("cannot open file: " + value.substr(1));
    std::string line;
    while (std::getline(in, line)) {
      for (double v : parse_number_list(line, ',')) vals.push_back(v);
    }
  } else if (!value.empty() && value.front() == '[' && value.back() == ']') {
    vals = parse_number_list(value.substr(1, value.size() - 2), ';');
  } else {
    throw std::invalid_argument("expected @file or [v1;v2;...], got: " + value);
  }
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// "[r1c1 r1c2; r2c1 r2c2]" or "@file.csv" with one row per line
MatrixXd parse_matrix_value(const std::string& value) {
  std::vector<std::vector<double>> rows;
  auto push_row = [&rows](const std::string& row_text, char sep) {
    std::vector<double> row;
    std::stringstream ss(row_text);
    std::string item;
    while (std::getline(ss, item, sep)) {
      std::stringstream trimmed(item);
      double v;
      if (trimmed >> v) row.push_back(v);
    }
    if (!row.empty()) rows.push_back(row);
  };
  if (!value.empty() && value.front() == '@') {
    std::ifstream in(value.substr(1));
    if (!in) throw std::invalid_argument("cannot open file: " + value.substr(1));
    std::string line;
    while (std::getline(in, line)) push_row(line, ',');
  } else if (!value.empty() && value.front() == '[' && value.back() == ']') {
    std::stringstream ss(value.substr(1, value.size() - 2));
    std::string row_text;
    while (std::getline(ss, row_text, ';')) push_row(row_text, ' ');
  } else {
    throw std::invalid_argument("expected @file or [r; r; ...], got: " + value);
  }
  if (rows.empty()) throw std::invalid_argument("empty matrix value");
  MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw std::invalid_argument("ragged matrix value");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

bool parse_bool(const std::string& v) {
  return v.empty() || v == "1" || v == "true" || v == "yes";
}

}  // namespace

Regularizer Regularizer::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  Regularizer r;
  if (name == "quadratic") r.kind = RegKind::quadratic;
  else if (name == "projperp") r.kind = RegKind::projection_perp;
  else if (name == "projpar") r.kind = RegKind::projection_par;
  else if (name == "mixed") r.kind = RegKind::mixed_projection;
  else if (name == "offset") r.kind = RegKind::offset_quadratic;
  else if (name == "gamma") r.kind = RegKind::gamma_ddpc;
  else if (name == "slack") r.kind = RegKind::slack_quadratic;
  else if (name == "general") r.kind = RegKind::general_weighted;
  else throw std::invalid_argument("unknown regularizer: " + name);

  if (colon == std::string::npos) return r;
  std::stringstream ss(spec.substr(colon + 1));
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    const std::string key = kv.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : kv.substr(eq + 1);
    if (key == "lambda") r.lambda = std::stod(value);
    else if (key == "l2") r.lambda2 = std::stod(value);
    else if (key == "l3") r.lambda3 = std::stod(value);
    else if (key == "lsigma") r.lambda_sigma = std::stod(value);
    else if (key == "abar") r.a_bar = parse_vector_value(value);
    else if (key == "S") r.S = parse_matrix_value(value);
    else if (key == "gamma3zero") r.gamma3_zero = parse_bool(value);
    else if (key == "affine") r.affine = parse_bool(value);
    else throw std::invalid_argument("unknown regularizer parameter: " + key);
  }
  return r;
}

std::string Regularizer::to_spec() const {
  std::string s = to_string(kind) + ":";
  switch (kind) {
    case RegKind::quadratic:
    case RegKind::projection_perp:
    case RegKind::projection_par:
      s += "lambda=" + fmt17(lambda);
      break;
    case RegKind::mixed_projection:
      s += "l2=" + fmt17(lambda2) + ",l3=" + fmt17(lambda3);
      break;
    case RegKind::offset_quadratic: {
      s += "lambda=" + fmt17(lambda) + ",abar=[";
      for (Eigen::Index i = 0; i < a_bar.size(); ++i) {
        if (i > 0) s += ";";
        s += fmt17(a_bar(i));
      }
      s += "]";
      break;
    }
    case RegKind::gamma_ddpc:
      s += "l2=" + fmt17(lambda2) + ",l3=" + fmt17(lambda3);
      if (gamma3_zero) s += ",gamma3zero";
      break;
    case RegKind::slack_quadratic:
      s += "lambda=" + fmt17(lambda) + ",lsigma=" + fmt17(lambda_sigma);
      break;
    case RegKind::general_weighted: {
      s += "S=[";
      for (Eigen::Index i = 0; i < S.rows(); ++i) {
        if (i > 0) s += ";";
        for (Eigen::Index j = 0; j < S.cols(); ++j) {
          if (j > 0) s += " ";
          s += fmt17(S(i, j));
        }
      }
      s += "]";
      break;
    }
  }
  if (affine) s += ",affine";
  return s;
}

namespace {

struct CoreTerms {
  double term_y = 0.0;
  double term_u = 0.0;
  double term_xi = 0.0;
};

CoreTerms core_terms(const LeastSquaresPredictor& P, const TrajectoryTuple& w) {
  CoreTerms t;
  t.term_y = weighted_sqnorm(w.y - P.predict_y(w.xi, w.u), P.Q_reg);
  t.term_u = weighted_sqnorm(w.u - P.predict_u(w.xi), P.R_reg);
  t.term_xi = weighted_sqnorm(w.xi, P.WWt_inv);
  return t;
}

void check_predictor_matches(const LeastSquaresPredictor& P,
                             const DataMatrix& data, const TrajectoryTuple& w) {
  if (P.xi_dim != data.w_rows() || P.u_dim != data.u_rows() ||
      P.y_dim != data.y_rows()) {
    throw std::invalid_argument("trajectory_cost: predictor/data mismatch");
  }
  if (w.xi.size() != P.xi_dim || w.u.size() != P.u_dim || w.y.size() != P.y_dim) {
    throw std::invalid_argument("trajectory_cost: trajectory dimension mismatch");
  }
}

TrajectoryCostBreakdown cost_from_terms(const Regularizer& reg,
                                        const CoreTerms& t,
                                        double gamma3_residual) {
  TrajectoryCostBreakdown b;
  switch (reg.kind) {
    case RegKind::quadratic:
    case RegKind::offset_quadratic:
    case RegKind::slack_quadratic:
      b.weight_y = b.weight_u = b.weight_xi = reg.lambda;
      b.term_y_active = b.term_u_active = b.term_xi_active = true;
      break;
    case RegKind::projection_perp:
      b.weight_y = reg.lambda;
      b.term_y_active = true;
      break;
    case RegKind::projection_par:
      b.weight_u = b.weight_xi = reg.lambda;
      b.term_u_active = b.term_xi_active = true;
      break;
    case RegKind::mixed_projection:
      b.weight_y = reg.lambda3;
      b.weight_u = b.weight_xi = reg.lambda2;
      b.term_y_active = b.term_u_active = b.term_xi_active = true;
      break;
    case RegKind::gamma_ddpc:
      b.weight_y = reg.lambda3;
      b.weight_u = reg.lambda2;
      b.term_y_active = !reg.gamma3_zero;
      b.term_u_active = true;
      if (reg.gamma3_zero) {
        b.gamma3_constrained = true;
        b.gamma3_residual = gamma3_residual;
      }
      break;
    case RegKind::general_weighted:
      throw std::logic_error("cost_from_terms: general_weighted has no closed form");
  }
  b.term_y = b.term_y_active ? b.weight_y * t.term_y : 0.0;
  b.term_u = b.term_u_active ? b.weight_u * t.term_u : 0.0;
  b.term_xi = b.term_xi_active ? b.weight_xi * t.term_xi : 0.0;
  b.total = b.term_y + b.term_u + b.term_xi;
  return b;
}

}  // namespace

TrajectoryCostBreakdown trajectory_cost(const Regularizer& reg,
                                        const LeastSquaresPredictor& P,
                                        const DataMatrix& data,
                                        const TrajectoryTuple& w) {
  reg.validate(data.cols());
  if (reg.affine) {
    throw std::invalid_argument("trajectory_cost: affine regularizer requires the affine fit");
  }
  check_predictor_matches(P, data, w);

  switch (reg.kind) {
    case RegKind::quadratic:
    case RegKind::projection_perp:
    case RegKind::projection_par:
    case RegKind::mixed_projection:
      return cost_from_terms(reg, core_terms(P, w), 0.0);
    case RegKind::gamma_ddpc: {
      CoreTerms t = core_terms(P, w);
      const double residual = (w.y - P.predict_y(w.xi, w.u)).norm();
      return cost_from_terms(reg, t, residual);
    }
    case RegKind::offset_quadratic: {
      TrajectoryTuple delta;
      delta.xi = w.xi - data.W() * reg.a_bar;
      delta.u = w.u - data.U() * reg.a_bar;
      delta.y = w.y - data.Y() * reg.a_bar;
      return cost_from_terms(reg, core_terms(P, delta), 0.0);
    }
    case RegKind::slack_quadratic: {
      // equivalent quadratic problem on the augmented data matrix
      SlackAugmentation aug = slack_augment(data, reg.lambda, reg.lambda_sigma);
      LeastSquaresPredictor P_aug = fit_ls(aug.data, P.tolerance);
      return cost_from_terms(Regularizer::quadratic(reg.lambda),
                             core_terms(P_aug, w), 0.0);
    }
    case RegKind::general_weighted: {
      BruteForceResult bf = brute_force_cost(reg, data, w, reg.affine);
      TrajectoryCostBreakdown b;
      b.total = bf.cost;
      b.closed_form = false;
      return b;
    }
  }
  throw std::logic_error("trajectory_cost: unreachable");
}

TrajectoryCostBreakdown trajectory_cost(const Regularizer& reg,
                                        const AffineLeastSquaresPredictor& P,
                                        const DataMatrix& data,
                                        const TrajectoryTuple& w) {
  reg.validate(data.cols());
  if (!reg.affine) {
    throw std::invalid_argument("trajectory_cost: affine fit requires an affine regularizer");
  }
  if (P.xi_dim != data.w_rows() || P.u_dim != data.u_rows() ||
      P.y_dim != data.y_rows()) {
    throw std::invalid_argument("trajectory_cost: predictor/data mismatch");
  }
  // checked quantities: the affine fit is the linear fit of [1'; W; U; Y]
  TrajectoryTuple w_checked = w;
  Eigen::VectorXd xi_checked(w.xi.size() + 1);
  xi_checked << 1.0, w.xi;
  w_checked.xi = xi_checked;
  Regularizer linear_reg = reg;
  linear_reg.affine = false;
  return trajectory_cost(linear_reg, P.checked, data.augment_ones(), w_checked);
}

TrajectoryCostBreakdown trajectory_cost(const Regularizer& reg,
                                        const OffsetPredictor& P,
                                        const DataMatrix& data,
                                        const TrajectoryTuple& w) {
  if (reg.kind != RegKind::offset_quadratic) {
    throw std::invalid_argument("trajectory_cost: offset predictor requires the offset variant");
  }
  return trajectory_cost(reg, P.base, data, w);
}

namespace {

// injection of the slack block into W rows
std::pair<int, int> slack_block(const DataMatrix& data) {
  const Dims& d = data.dims();
  if (data.ones_augmented()) {
    throw std::invalid_argument("slack: apply before ones-augmentation");
  }
  if (d.mode == DataMode::io) {
    return {d.m * d.N_p, d.p * d.N_p};  // offset past the u_p rows, size p*N_p
  }
  return {0, data.w_rows()};  // the whole measured state
}

}  // namespace

RegularizerQuadraticForm regularizer_quadratic_form(const Regularizer& reg,
                                                    const DataMatrix& data,
                                                    double tolerance) {
  reg.validate(data.cols());
  const long ell = data.cols();
  RegularizerQuadraticForm qf;
  qf.g = VectorXd::Zero(ell);

  switch (reg.kind) {
    case RegKind::quadratic:
      qf.H = 2.0 * reg.lambda * MatrixXd::Identity(ell, ell);
      break;
    case RegKind::projection_perp:
    case RegKind::projection_par:
    case RegKind::mixed_projection: {
      const MatrixXd Z = reg.affine ? data.augment_ones().Z() : data.Z();
      ProjectorPair proj = projectors(Z, tolerance);
      if (reg.kind == RegKind::projection_perp) {
        qf.H = 2.0 * reg.lambda * proj.Pi_perp;
      } else if (reg.kind == RegKind::projection_par) {
        qf.H = 2.0 * reg.lambda * proj.Pi;
      } else {
        qf.H = 2.0 * (reg.lambda2 * proj.Pi + reg.lambda3 * proj.Pi_perp);
      }
      break;
    }
    case RegKind::offset_quadratic:
      qf.H = 2.0 * reg.lambda * MatrixXd::Identity(ell, ell);
      qf.g = -2.0 * reg.lambda * reg.a_bar;
      qf.constant = reg.lambda * reg.a_bar.squaredNorm();
      break;
    case RegKind::gamma_ddpc: {
      LQFactors F = lq_decompose(data, tolerance);
      const MatrixXd Q2 = F.Q2();
      const MatrixXd Q3 = F.Q3();
      if (reg.gamma3_zero) {
        qf.H = 2.0 * reg.lambda2 * Q2.transpose() * Q2;
        qf.extra_rows = Q3;
        qf.extra_rhs = VectorXd::Zero(Q3.rows());
      } else {
        qf.H = 2.0 * (reg.lambda2 * Q2.transpose() * Q2 +
                      reg.lambda3 * Q3.transpose() * Q3);
      }
      break;
    }
    case RegKind::slack_quadratic: {
      const auto [offset, n_sigma] = slack_block(data);
      (void)offset;
      qf.n_sigma = n_sigma;
      qf.H = MatrixXd::Zero(ell + n_sigma, ell + n_sigma);
      qf.H.topLeftCorner(ell, ell) = 2.0 * reg.lambda * MatrixXd::Identity(ell, ell);
      qf.H.bottomRightCorner(n_sigma, n_sigma) =
          2.0 * reg.lambda_sigma * MatrixXd::Identity(n_sigma, n_sigma);
      qf.g = VectorXd::Zero(ell + n_sigma);
      break;
    }
    case RegKind::general_weighted:
      qf.H = 2.0 * reg.S.transpose() * reg.S;
      break;
  }
  return qf;
}

BruteForceResult brute_force_cost(const Regularizer& reg, const DataMatrix& data,
                                  const TrajectoryTuple& w, bool affine,
                                  double tolerance) {
  reg.validate(data.cols());
  const bool affine_mode = affine || reg.affine;
  const long ell = data.cols();
  if (w.xi.size() != data.w_rows() || w.u.size() != data.u_rows() ||
      w.y.size() != data.y_rows()) {
    throw std::invalid_argument("brute_force_cost: trajectory dimension mismatch");
  }

  RegularizerQuadraticForm qf = regularizer_quadratic_form(reg, data, tolerance);
  const int n_sigma = qf.n_sigma;
  const long nx = ell + n_sigma;

  MatrixXd A = MatrixXd::Zero(data.total_rows() + (affine_mode ? 1 : 0), nx);
  VectorXd b(A.rows());
  long row = 0;
  if (affine_mode) {
    A.block(0, 0, 1, ell) = Eigen::RowVectorXd::Ones(ell);
    b(0) = 1.0;
    row = 1;
  }
  A.block(row, 0, data.total_rows(), ell) = data.D();
  b.segment(row, data.total_rows()) = w.stacked();
  if (n_sigma > 0) {
    // W a - sigma_block = xi
    const auto [offset, count] = slack_block(data);
    A.block(row + offset, ell, count, count) = -MatrixXd::Identity(count, count);
  }

  BruteForceResult res;
  {
    const VectorXd a_ls = pinv(A, tolerance) * b;
    res.feasibility_residual = (A * a_ls - b).norm();
    if (res.feasibility_residual > 1e-8 * (1.0 + b.norm())) {
      throw InfeasibleError(
          "brute_force_cost: trajectory not reachable from the data, residual " +
              std::to_string(res.feasibility_residual),
          res.feasibility_residual);
    }
  }

  MatrixXd A_all = A;
  VectorXd b_all = b;
  if (qf.extra_rows.size() > 0) {
    A_all.resize(A.rows() + qf.extra_rows.rows(), nx);
    A_all.topRows(A.rows()) = A;
    A_all.bottomRows(qf.extra_rows.rows()).setZero();
    A_all.bottomRows(qf.extra_rows.rows()).leftCols(ell) = qf.extra_rows;
    b_all.resize(b.size() + qf.extra_rhs.size());
    b_all.head(b.size()) = b;
    b_all.tail(qf.extra_rhs.size()) = qf.extra_rhs;
  }

  KktResult kkt = solve_kkt(qf.H, qf.g, A_all, b_all, tolerance);
  res.a = kkt.x.head(ell);
  if (n_sigma > 0) res.sigma = kkt.x.tail(n_sigma);
  res.cost = 0.5 * kkt.x.dot(qf.H * kkt.x) + qf.g.dot(kkt.x) + qf.constant;
  return res;
}

GammaCoordinates gamma_from_trajectory(const LQFactors& F,
                                       const TrajectoryTuple& w,
                                       bool allow_pinv_fallback,
                                       double tolerance) {
  if (w.xi.size() != F.rows_w || w.u.size() != F.rows_u || w.y.size() != F.rows_y) {
    throw std::invalid_argument("gamma_from_trajectory: dimension mismatch");
  }
  GammaCoordinates g;
  auto solve_block = [&](const MatrixXd& Lii, const VectorXd& rhs) -> VectorXd {
    double max_diag = 0.0;
    for (Eigen::Index i = 0; i < Lii.rows(); ++i) {
      max_diag = std::max(max_diag, std::abs(Lii(i, i)));
    }
    bool singular = max_diag <= 0.0;
    for (Eigen::Index i = 0; i < Lii.rows() && !singular; ++i) {
      if (std::abs(Lii(i, i)) <= tolerance * max_diag) singular = true;
    }
    if (!singular) {
      return Lii.triangularView<Eigen::Lower>().solve(rhs);
    }
    if (!allow_pinv_fallback) {
      throw std::runtime_error("gamma_from_trajectory: singular diagonal block");
    }
    g.used_pinv_fallback = true;
    return pinv(Lii, tolerance) * rhs;
  };
  g.gamma1 = solve_block(F.L11(), w.xi);
  g.gamma2 = solve_block(F.L22(), w.u - F.L21() * g.gamma1);
  g.gamma3 = solve_block(F.L33(), w.y - F.L31() * g.gamma1 - F.L32() * g.gamma2);
  return g;
}

SlackAugmentation slack_augment(const DataMatrix& data, double lambda,
                                double lambda_sigma) {
  if (lambda <= 0.0 || lambda_sigma <= 0.0) {
    throw std::invalid_argument("slack_augment: weights must be positive");
  }
  const auto [offset, count] = slack_block(data);
  const double scale = std::sqrt(lambda / lambda_sigma);
  const long ell = data.cols();

  MatrixXd W_aug(data.w_rows(), ell + count);
  W_aug.leftCols(ell) = data.W();
  W_aug.rightCols(count).setZero();
  W_aug.block(offset, ell, count, count) = -scale * MatrixXd::Identity(count, count);

  MatrixXd U_aug(data.u_rows(), ell + count);
  U_aug.leftCols(ell) = data.U();
  U_aug.rightCols(count).setZero();

  MatrixXd Y_aug(data.y_rows(), ell + count);
  Y_aug.leftCols(ell) = data.Y();
  Y_aug.rightCols(count).setZero();

  SlackAugmentation aug{DataMatrix(std::move(W_aug), std::move(U_aug),
                                   std::move(Y_aug), data.dims()),
                        count, offset, scale};
  return aug;
}

std::vector<double> rescale_weights(const std::vector<double>& lambdas,
                                    long ell_old, long ell_new) {
  if (ell_old < 1 || ell_new < 1) {
    throw std::invalid_argument("rescale_weights: column counts must be >= 1");
  }
  const double factor = static_cast<double>(ell_new) / static_cast<double>(ell_old);
  std::vector<double> out(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) out[i] = factor * lambdas[i];
  return out;
}

}  // namespace ddpc
