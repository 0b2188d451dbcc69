#include "ddpc/trajectory_data.hpp"

#include <stdexcept>

#include "ddpc/linear_core.hpp"

namespace ddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(DataMode mode) {
  return mode == DataMode::io ? "io" : "statespace";
}

DataMode data_mode_from_string(const std::string& s) {
  if (s == "io") return DataMode::io;
  if (s == "statespace") return DataMode::statespace;
  throw std::invalid_argument("unknown data mode: " + s);
}

SystemModel::SystemModel(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                         VectorXd e, VectorXd r, double noise_std)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      e_(std::move(e)),
      r_(std::move(r)),
      noise_std_(noise_std) {
  const Eigen::Index n = A_.rows();
  if (A_.cols() != n) throw std::invalid_argument("SystemModel: A must be square");
  if (B_.rows() != n) throw std::invalid_argument("SystemModel: B row count != n");
  if (C_.cols() != n) throw std::invalid_argument("SystemModel: C column count != n");
  if (D_.rows() != C_.rows() || D_.cols() != B_.cols()) {
    throw std::invalid_argument("SystemModel: D must be p x m");
  }
  if (e_.size() != n) throw std::invalid_argument("SystemModel: e must have n entries");
  if (r_.size() != C_.rows()) throw std::invalid_argument("SystemModel: r must have p entries");
  if (noise_std_ < 0.0) throw std::invalid_argument("SystemModel: noise_std must be >= 0");
}

SystemModel::SystemModel(MatrixXd A, MatrixXd B, double noise_std)
    : SystemModel(A, B, MatrixXd::Identity(A.rows(), A.rows()),
                  MatrixXd::Zero(A.rows(), B.cols()), VectorXd::Zero(A.rows()),
                  VectorXd::Zero(A.rows()), noise_std) {}

bool SystemModel::is_lti() const {
  return e_.isZero(0.0) && r_.isZero(0.0);
}

SimResult simulate(const SystemModel& model, const VectorXd& x0,
                   const MatrixXd& u_seq, Rng& rng) {
  const int n = model.n();
  const int m = model.m();
  const int p = model.p();
  if (x0.size() != n) throw std::invalid_argument("simulate: x0 dimension mismatch");
  if (u_seq.rows() != m) throw std::invalid_argument("simulate: u_seq row count != m");
  const Eigen::Index T = u_seq.cols();
  if (T < 1) throw std::invalid_argument("simulate: need at least one input sample");

  SimResult res;
  res.x_true.resize(n, T + 1);
  res.y_true.resize(p, T);
  res.x_true.col(0) = x0;
  for (Eigen::Index k = 0; k < T; ++k) {
    res.y_true.col(k) = model.C() * res.x_true.col(k) + model.D() * u_seq.col(k) + model.r();
    res.x_true.col(k + 1) =
        model.A() * res.x_true.col(k) + model.B() * u_seq.col(k) + model.e();
  }

  res.x = res.x_true;
  res.y = res.y_true;
  const double std = model.noise_std();
  if (std > 0.0) {
    // measurement noise in time order: x0 first, then y_k before x_{k+1}
    for (int i = 0; i < n; ++i) res.x(i, 0) += rng.gaussian(std);
    for (Eigen::Index k = 0; k < T; ++k) {
      for (int i = 0; i < p; ++i) res.y(i, k) += rng.gaussian(std);
      for (int i = 0; i < n; ++i) res.x(i, k + 1) += rng.gaussian(std);
    }
  }
  return res;
}

SimResult simulate(const SystemModel& model, const VectorXd& x0,
                   const MatrixXd& u_seq, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return simulate(model, x0, u_seq, rng);
}

DataMatrix::DataMatrix(MatrixXd W, MatrixXd U, MatrixXd Y, Dims dims,
                       bool ones_augmented)
    : W_(std::move(W)),
      U_(std::move(U)),
      Y_(std::move(Y)),
      dims_(dims),
      ones_augmented_(ones_augmented) {
  if (W_.cols() != U_.cols() || U_.cols() != Y_.cols()) {
    throw std::invalid_argument("DataMatrix: W, U, Y must share the column count");
  }
  dims_.ell = W_.cols();
}

MatrixXd DataMatrix::Z() const {
  MatrixXd z(W_.rows() + U_.rows(), cols());
  z << W_, U_;
  return z;
}

MatrixXd DataMatrix::D() const {
  MatrixXd d(total_rows(), cols());
  d << W_, U_, Y_;
  return d;
}

DataMatrix DataMatrix::augment_ones() const {
  if (ones_augmented_) {
    throw std::logic_error("DataMatrix: already ones-augmented");
  }
  MatrixXd W_checked(W_.rows() + 1, cols());
  W_checked.row(0) = Eigen::RowVectorXd::Ones(cols());
  W_checked.bottomRows(W_.rows()) = W_;
  return DataMatrix(W_checked, U_, Y_, dims_, true);
}

VectorXd TrajectoryTuple::stacked() const {
  VectorXd w(xi.size() + u.size() + y.size());
  w << xi, u, y;
  return w;
}

TrajectoryTuple TrajectoryTuple::split(const VectorXd& w, int w_rows, int u_rows,
                                       int y_rows) {
  if (w.size() != w_rows + u_rows + y_rows) {
    throw std::invalid_argument("TrajectoryTuple::split: dimension mismatch");
  }
  TrajectoryTuple t;
  t.xi = w.head(w_rows);
  t.u = w.segment(w_rows, u_rows);
  t.y = w.tail(y_rows);
  return t;
}

namespace {

// block-Hankel with `depth` block rows of a signal (rows x T)
MatrixXd hankel_blocks(const MatrixXd& sig, int depth, long ell) {
  const Eigen::Index rows = sig.rows();
  MatrixXd H(rows * depth, ell);
  for (int i = 0; i < depth; ++i) {
    H.middleRows(i * rows, rows) = sig.middleCols(i, ell);
  }
  return H;
}

}  // namespace

DataMatrix build_hankel(const MatrixXd& u_data, const MatrixXd& y_data, int N_p,
                        int N_f, DataMode mode) {
  if (u_data.size() == 0 || y_data.size() == 0) {
    throw std::invalid_argument("build_hankel: empty data sequence");
  }
  if (N_f < 1 || (mode == DataMode::io && N_p < 1)) {
    throw std::invalid_argument("build_hankel: window lengths must be positive");
  }
  const int m = static_cast<int>(u_data.rows());
  const Eigen::Index T = u_data.cols();

  if (mode == DataMode::io) {
    const int p = static_cast<int>(y_data.rows());
    if (y_data.cols() != T) {
      throw std::invalid_argument("build_hankel: u and y must have the same length");
    }
    const int L = N_p + N_f;
    const long ell = static_cast<long>(T) - L + 1;
    if (ell < 1) {
      throw std::invalid_argument("build_hankel: need at least L = " +
                                  std::to_string(L) + " samples, got " +
                                  std::to_string(T));
    }
    MatrixXd Hu = hankel_blocks(u_data, L, ell);
    MatrixXd Hy = hankel_blocks(y_data, L, ell);
    MatrixXd W(m * N_p + p * N_p, ell);
    W << Hu.topRows(m * N_p), Hy.topRows(p * N_p);
    MatrixXd U = Hu.bottomRows(m * N_f);
    MatrixXd Y = Hy.bottomRows(p * N_f);
    Dims dims;
    dims.m = m;
    dims.p = p;
    dims.N_p = N_p;
    dims.N_f = N_f;
    dims.mode = DataMode::io;
    return DataMatrix(std::move(W), std::move(U), std::move(Y), dims);
  }

  // statespace: y_data holds the state sequence, one column longer than u
  const int n = static_cast<int>(y_data.rows());
  const long ell = static_cast<long>(T) - N_f + 1;
  if (ell < 1) {
    throw std::invalid_argument("build_hankel: need at least N_f = " +
                                std::to_string(N_f) + " input samples, got " +
                                std::to_string(T));
  }
  if (y_data.cols() < T + 1) {
    throw std::invalid_argument("build_hankel: state sequence must have at least " +
                                std::to_string(T + 1) + " samples");
  }
  MatrixXd W = y_data.middleCols(0, ell);
  MatrixXd U = hankel_blocks(u_data, N_f, ell);
  MatrixXd Y(n * N_f, ell);
  for (int i = 0; i < N_f; ++i) {
    Y.middleRows(i * n, n) = y_data.middleCols(i + 1, ell);
  }
  Dims dims;
  dims.m = m;
  dims.p = n;
  dims.n = n;
  dims.N_p = N_p;
  dims.N_f = N_f;
  dims.mode = DataMode::statespace;
  return DataMatrix(std::move(W), std::move(U), std::move(Y), dims);
}

DataMatrix build_from_columns(const std::vector<TrajectoryTuple>& columns,
                              Dims dims) {
  if (columns.empty()) {
    throw std::invalid_argument("build_from_columns: no columns given");
  }
  const Eigen::Index w_rows = columns.front().xi.size();
  const Eigen::Index u_rows = columns.front().u.size();
  const Eigen::Index y_rows = columns.front().y.size();
  MatrixXd W(w_rows, columns.size());
  MatrixXd U(u_rows, columns.size());
  MatrixXd Y(y_rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const TrajectoryTuple& t = columns[j];
    if (t.xi.size() != w_rows || t.u.size() != u_rows || t.y.size() != y_rows) {
      throw std::invalid_argument("build_from_columns: mixed tuple dimensions");
    }
    W.col(j) = t.xi;
    U.col(j) = t.u;
    Y.col(j) = t.y;
  }
  return DataMatrix(std::move(W), std::move(U), std::move(Y), dims);
}

namespace {

RankReport rank_report_impl(const DataMatrix& data, std::optional<int> n,
                            double tolerance, bool affine) {
  if (tolerance <= 0.0) {
    throw std::invalid_argument("rank_report: tolerance must be positive");
  }
  RankReport rep;
  rep.tolerance = tolerance;
  rep.affine = affine;
  rep.rank_D = numerical_rank(data.D(), tolerance);
  rep.rank_Z = numerical_rank(data.Z(), tolerance);
  rep.rank_W = numerical_rank(data.W(), tolerance);
  rep.full_row_rank_D = rep.rank_D == data.total_rows();
  rep.rank_deficiency_holds = rep.rank_D == rep.rank_Z;
  const Dims& d = data.dims();
  const int extra = affine ? 1 : 0;
  if (n.has_value()) {
    rep.gpe_target_io = d.L() * d.m + *n + extra;
    rep.gpe_target_statespace = *n + d.m * d.N_f + extra;
    const int target = d.mode == DataMode::io ? *rep.gpe_target_io
                                              : *rep.gpe_target_statespace;
    rep.gpe_satisfied = rep.rank_D == target;
  }
  return rep;
}

}  // namespace

RankReport rank_report(const DataMatrix& data, std::optional<int> n,
                       double tolerance) {
  return rank_report_impl(data, n, tolerance, false);
}

RankReport affine_rank_report(const DataMatrix& data, std::optional<int> n,
                              double tolerance) {
  return rank_report_impl(data.augment_ones(), n, tolerance, true);
}

}  // namespace ddpc
