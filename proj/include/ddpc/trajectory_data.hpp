#ifndef DDPC_TRAJECTORY_DATA_HPP
#define DDPC_TRAJECTORY_DATA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddpc/rng.hpp"

namespace ddpc {

inline constexpr double kDefaultRankTol = 1e-9;

enum class DataMode { io, statespace };

std::string to_string(DataMode mode);
DataMode data_mode_from_string(const std::string& s);

// Discrete-time model x+ = A x + B u + e, y = C x + D u + r.
// LTI iff e = 0 and r = 0; measurement noise is i.i.d. Gaussian.
class SystemModel {
public:
  SystemModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
              Eigen::MatrixXd D, Eigen::VectorXd e, Eigen::VectorXd r,
              double noise_std);

  // LTI convenience: C = I, D = 0, e = r = 0
  SystemModel(Eigen::MatrixXd A, Eigen::MatrixXd B, double noise_std = 0.0);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::MatrixXd& D() const { return D_; }
  const Eigen::VectorXd& e() const { return e_; }
  const Eigen::VectorXd& r() const { return r_; }
  double noise_std() const { return noise_std_; }

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  int p() const { return static_cast<int>(C_.rows()); }
  bool is_lti() const;

private:
  Eigen::MatrixXd A_, B_, C_, D_;
  Eigen::VectorXd e_, r_;
  double noise_std_;
};

struct SimResult {
  Eigen::MatrixXd x;       // n x (T+1), measured (noise added when noise_std > 0)
  Eigen::MatrixXd y;       // p x T, measured
  Eigen::MatrixXd x_true;  // noise-free counterparts
  Eigen::MatrixXd y_true;
};

SimResult simulate(const SystemModel& model, const Eigen::VectorXd& x0,
                   const Eigen::MatrixXd& u_seq, Rng& rng);
SimResult simulate(const SystemModel& model, const Eigen::VectorXd& x0,
                   const Eigen::MatrixXd& u_seq, std::uint64_t rng_seed);

struct Dims {
  int m = 1;   // inputs per step
  int p = 1;   // outputs per step (unused for row counts in statespace mode)
  std::optional<int> n;  // state dimension when known
  int N_p = 1;
  int N_f = 1;
  long ell = 0;
  DataMode mode = DataMode::io;
  std::optional<int> lag_hint;

  int L() const { return N_p + N_f; }
  int w_rows() const { return mode == DataMode::io ? (m + p) * N_p : n.value_or(0); }
  int u_rows() const { return m * N_f; }
  int y_rows() const { return (mode == DataMode::io ? p : n.value_or(0)) * N_f; }
};

// Column-partitioned trajectory data [W; U; Y]. Column layout is fixed:
// state block xi, then future inputs u, then future outputs y.
class DataMatrix {
public:
  DataMatrix(Eigen::MatrixXd W, Eigen::MatrixXd U, Eigen::MatrixXd Y, Dims dims,
             bool ones_augmented = false);

  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::MatrixXd& U() const { return U_; }
  const Eigen::MatrixXd& Y() const { return Y_; }
  Eigen::MatrixXd Z() const;  // [W; U]
  Eigen::MatrixXd D() const;  // [W; U; Y]

  const Dims& dims() const { return dims_; }
  long cols() const { return W_.cols(); }
  int w_rows() const { return static_cast<int>(W_.rows()); }
  int u_rows() const { return static_cast<int>(U_.rows()); }
  int y_rows() const { return static_cast<int>(Y_.rows()); }
  int total_rows() const { return w_rows() + u_rows() + y_rows(); }
  bool ones_augmented() const { return ones_augmented_; }

  // Prepends a row of ones to W (affine/checked form).
  DataMatrix augment_ones() const;

private:
  Eigen::MatrixXd W_, U_, Y_;
  Dims dims_;
  bool ones_augmented_;
};

struct TrajectoryTuple {
  Eigen::VectorXd xi;
  Eigen::VectorXd u;
  Eigen::VectorXd y;

  Eigen::VectorXd stacked() const;
  static TrajectoryTuple split(const Eigen::VectorXd& w, int w_rows, int u_rows,
                               int y_rows);
};

DataMatrix build_hankel(const Eigen::MatrixXd& u_data,
                        const Eigen::MatrixXd& y_data, int N_p, int N_f,
                        DataMode mode = DataMode::io);

DataMatrix build_from_columns(const std::vector<TrajectoryTuple>& columns,
                              Dims dims);

struct RankReport {
  int rank_D = 0;
  int rank_Z = 0;
  int rank_W = 0;
  bool gpe_satisfied = false;
  bool full_row_rank_D = false;
  bool rank_deficiency_holds = false;
  double tolerance = kDefaultRankTol;
  // excitation targets under both depth conventions; the mode-appropriate one
  // decides gpe_satisfied (requires n)
  std::optional<int> gpe_target_io;
  std::optional<int> gpe_target_statespace;
  bool affine = false;  // report refers to [1'; D]
};

RankReport rank_report(const DataMatrix& data, std::optional<int> n,
                       double tolerance = kDefaultRankTol);

// Same report computed on the ones-augmented matrix [1'; D]; the excitation
// targets gain +1 for the affine hull condition.
RankReport affine_rank_report(const DataMatrix& data, std::optional<int> n,
                              double tolerance = kDefaultRankTol);

}  // namespace ddpc

#endif
