#include "ddpc/fixtures.hpp"

#include "ddpc/rng.hpp"

namespace ddpc::fixtures {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SystemModel example_system(double noise_std) {
  MatrixXd A(1, 1), B(1, 1);
  A << 2.0;
  B << -0.5;
  return SystemModel(A, B, noise_std);
}

Dims example_cloud_dims() {
  Dims dims;
  dims.m = 1;
  dims.p = 1;
  dims.n = 1;
  dims.N_p = 1;
  dims.N_f = 1;
  dims.mode = DataMode::statespace;
  return dims;
}

std::vector<TrajectoryTuple> example_cloud(int n_samples, double noise_std,
                                           std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("example_cloud: need at least one sample");
  SystemModel model = example_system(noise_std);
  Rng rng(seed);
  std::vector<TrajectoryTuple> columns;
  columns.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    VectorXd x0(1), u(1);
    x0 << rng.uniform(-1.0, 1.0);
    u << rng.uniform(-1.0, 1.0);
    SimResult sim = simulate(model, x0, u, rng);
    TrajectoryTuple t;
    t.xi = sim.x.col(0);
    t.u = u;
    t.y = sim.x.col(1);
    columns.push_back(std::move(t));
  }
  return columns;
}

DataMatrix example_cloud_data(int n_samples, double noise_std, std::uint64_t seed) {
  return build_from_columns(example_cloud(n_samples, noise_std, seed),
                            example_cloud_dims());
}

namespace {

// the recorded input-state sequences behind the two Hankel fixtures
const double kStateSeq[] = {-0.1941, 0.0048, -0.2145, -0.5427, -1.3683, -3.1384, -5.9759};
const double kInputSeq[] = {-0.7859, 0.4483, 0.2274, 0.5659, 0.8037, -0.6017};

}  // namespace

DataMatrix example_hankel_short() {
  MatrixXd x(1, 5), u(1, 4);
  for (int i = 0; i < 5; ++i) x(0, i) = kStateSeq[i];
  for (int i = 0; i < 4; ++i) u(0, i) = kInputSeq[i];
  return build_hankel(u, x, 1, 1, DataMode::statespace);
}

DataMatrix example_hankel_long() {
  MatrixXd x(1, 7), u(1, 6);
  for (int i = 0; i < 7; ++i) x(0, i) = kStateSeq[i];
  for (int i = 0; i < 6; ++i) u(0, i) = kInputSeq[i];
  return build_hankel(u, x, 1, 2, DataMode::statespace);
}

RandomInstance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  // draw small block sizes until the row budget holds
  int m = 0, p = 0, N_p = 0, N_f = 0, n = 0;
  bool statespace = false;
  int rows = 0;
  do {
    m = 1 + static_cast<int>(rng.unit() * 2.0);       // 1..2
    p = 1 + static_cast<int>(rng.unit() * 2.0);
    N_p = 1 + static_cast<int>(rng.unit() * 2.0);
    N_f = 1 + static_cast<int>(rng.unit() * 2.0);
    n = 1 + static_cast<int>(rng.unit() * 2.0);
    statespace = rng.unit() < 0.25;
    rows = statespace ? n + (m + n) * N_f : (m + p) * (N_p + N_f);
  } while (rows > 10);

  Dims dims;
  dims.m = m;
  dims.N_p = N_p;
  dims.N_f = N_f;
  if (statespace) {
    dims.mode = DataMode::statespace;
    dims.p = n;
    dims.n = n;
  } else {
    dims.mode = DataMode::io;
    dims.p = p;
  }

  const long ell_min = rows + 2;
  const long ell = ell_min + static_cast<long>(rng.unit() * static_cast<double>(60 - ell_min));
  auto gauss_matrix = [&rng](int r, long c) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) M(i, j) = rng.gaussian();
    return M;
  };

  const int wr = statespace ? n : (m + p) * N_p;
  const int ur = m * N_f;
  const int yr = (statespace ? n : p) * N_f;
  RandomInstance inst{DataMatrix(gauss_matrix(wr, ell), gauss_matrix(ur, ell),
                                 gauss_matrix(yr, ell), dims),
                      TrajectoryTuple{}, seed};
  inst.w.xi = gauss_matrix(wr, 1);
  inst.w.u = gauss_matrix(ur, 1);
  inst.w.y = gauss_matrix(yr, 1);
  return inst;
}

DPCProblem random_problem(std::uint64_t seed, const Regularizer& reg) {
  RandomInstance inst = random_instance(seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  const int nu = inst.data.u_rows();
  const int ny = inst.data.y_rows();
  auto pd_matrix = [&rng](int k) {
    MatrixXd M(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) M(i, j) = rng.gaussian();
    return MatrixXd(M * M.transpose() + 0.2 * MatrixXd::Identity(k, k));
  };
  auto gauss_vec = [&rng](int k) {
    VectorXd v(k);
    for (int i = 0; i < k; ++i) v(i) = rng.gaussian();
    return v;
  };

  ControlObjective obj;
  obj.Q = pd_matrix(ny);
  obj.y_ref = gauss_vec(ny);
  obj.R_u = pd_matrix(nu);
  obj.u_ref = gauss_vec(nu);

  DPCProblem prob{std::move(inst.data), std::move(obj), ConstraintSet{}, reg,
                  inst.w.xi};
  return prob;
}

}  // namespace ddpc::fixtures
