#include <doctest.h>

#include <Eigen/Dense>

#include "ddpc/linear_core.hpp"
#include "ddpc/rng.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace ddpc;

TEST_CASE("pinv: identity and zero") {
  CHECK((pinv(MatrixXd::Identity(4, 4)) - MatrixXd::Identity(4, 4)).norm() < 1e-14);
  MatrixXd Z = MatrixXd::Zero(3, 5);
  MatrixXd Zp = pinv(Z);
  CHECK(Zp.rows() == 5);
  CHECK(Zp.cols() == 3);
  CHECK(Zp.norm() == 0.0);
}

TEST_CASE("pinv: full-row-rank matrix matches the Gram-inverse formula") {
  Rng rng(11);
  MatrixXd M = oracles::gauss_matrix(rng, 3, 5);
  MatrixXd expected = M.transpose() * (M * M.transpose()).inverse();
  CHECK((pinv(M) - expected).norm() < 1e-10 * expected.norm());
}

TEST_CASE("pinv: Penrose identities on random shapes") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const int r = 1 + static_cast<int>(rng.unit() * 12.0);
    const int c = 1 + static_cast<int>(rng.unit() * 12.0);
    MatrixXd M = oracles::gauss_matrix(rng, r, c);
    if (rng.unit() < 0.3 && r > 1) M.row(r - 1) = M.row(0);  // force rank loss
    MatrixXd P = pinv(M);
    const double scale = 1.0 + M.norm();
    CHECK((M * P * M - M).norm() <= 1e-8 * scale);
    CHECK((P * M * P - P).norm() <= 1e-8 * scale);
    CHECK(((M * P).transpose() - M * P).norm() <= 1e-8 * scale);
    CHECK(((P * M).transpose() - P * M).norm() <= 1e-8 * scale);
  }
}

TEST_CASE("projectors: identity data") {
  ProjectorPair pair = projectors(MatrixXd::Identity(3, 3));
  CHECK((pair.Pi - MatrixXd::Identity(3, 3)).norm() < 1e-12);
  CHECK(pair.Pi_perp.norm() < 1e-12);
}

TEST_CASE("projectors: rank-1 row") {
  MatrixXd z(1, 3);
  z << 1.0, 2.0, 2.0;
  ProjectorPair pair = projectors(z);
  MatrixXd expected = z.transpose() * z / z.squaredNorm();
  CHECK((pair.Pi - expected).norm() < 1e-12);
}

TEST_CASE("projectors: invariants and the orthogonal split") {
  Rng rng(5);
  MatrixXd Z = oracles::gauss_matrix(rng, 3, 7);
  ProjectorPair pair = projectors(Z);
  CHECK((pair.Pi * pair.Pi - pair.Pi).norm() < 1e-10);
  CHECK((pair.Pi_perp * pair.Pi_perp - pair.Pi_perp).norm() < 1e-10);
  CHECK((pair.Pi + pair.Pi_perp - MatrixXd::Identity(7, 7)).norm() < 1e-12);
  CHECK((pair.Pi * pair.Pi_perp).norm() < 1e-10);
  CHECK((pair.Pi - pair.Pi.transpose()).norm() < 1e-12);
  for (int k = 0; k < 5; ++k) {
    VectorXd a = oracles::gauss_vector(rng, 7);
    const double split = (pair.Pi * a).squaredNorm() + (pair.Pi_perp * a).squaredNorm();
    CHECK(split == doctest::Approx(a.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("lq_decompose: recovers a triangular factor up to signs") {
  MatrixXd L0 = MatrixXd::Zero(3, 3);
  L0 << 2.0, 0.0, 0.0, 1.0, 3.0, 0.0, -1.0, 0.5, 1.5;
  MatrixXd D(3, 4);
  D << L0, MatrixXd::Zero(3, 1);  // Q = [I 0]
  LQFactors f = lq_decompose(D, 1, 1, 1);
  CHECK((f.L * f.Q - D).norm() < 1e-12);
  CHECK((f.L - L0).norm() < 1e-10);  // nonnegative-diagonal convention
}

TEST_CASE("lq_decompose: reconstruction and orthonormality") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    MatrixXd D = oracles::gauss_matrix(rng, 6, 15);
    LQFactors f = lq_decompose(D, 2, 2, 2);
    CHECK((f.L * f.Q - D).norm() <= 1e-10 * D.norm());
    MatrixXd QQt = f.Q * f.Q.transpose();
    CHECK((QQt - MatrixXd::Identity(6, 6)).norm() <= 1e-10);
    CHECK(!f.diagonal_singular);
  }
}

TEST_CASE("lq_decompose: rank-deficient data still reconstructs, flagged") {
  Rng rng(3);
  MatrixXd D = oracles::gauss_matrix(rng, 6, 15);
  D.row(5) = D.row(0) + D.row(1);
  LQFactors f = lq_decompose(D, 2, 2, 2);
  CHECK((f.L * f.Q - D).norm() <= 1e-10 * D.norm());
  CHECK(f.diagonal_singular);
}

TEST_CASE("weighted_sqnorm basics") {
  Rng rng(9);
  VectorXd v = oracles::gauss_vector(rng, 4);
  CHECK(weighted_sqnorm(v, MatrixXd::Identity(4, 4)) ==
        doctest::Approx(v.squaredNorm()));
  CHECK(weighted_sqnorm(VectorXd::Zero(4), MatrixXd::Identity(4, 4)) == 0.0);
  MatrixXd A = oracles::gauss_matrix(rng, 4, 4);
  MatrixXd Wt = A.transpose() * A;
  CHECK(weighted_sqnorm(v, Wt) == doctest::Approx((A * v).squaredNorm()).epsilon(1e-12));
  MatrixXd bad = A;  // generic, not symmetric
  CHECK_THROWS_AS(weighted_sqnorm(v, bad), std::invalid_argument);
}

TEST_CASE("solve_kkt: projection onto an affine set") {
  Rng rng(17);
  MatrixXd A = oracles::gauss_matrix(rng, 2, 5);
  VectorXd b = oracles::gauss_vector(rng, 2);
  KktResult res = solve_kkt(MatrixXd::Identity(5, 5), VectorXd::Zero(5), A, b);
  CHECK((res.x - pinv(A) * b).norm() < 1e-10);
}

TEST_CASE("solve_kkt: unconstrained strictly convex") {
  Rng rng(18);
  MatrixXd A = oracles::gauss_matrix(rng, 4, 4);
  MatrixXd H = A.transpose() * A + MatrixXd::Identity(4, 4);
  VectorXd g = oracles::gauss_vector(rng, 4);
  KktResult res = solve_kkt(H, g, MatrixXd::Zero(0, 4), VectorXd::Zero(0));
  CHECK((res.x + H.inverse() * g).norm() < 1e-10);
}

TEST_CASE("solve_kkt: random consistent instances, residuals and oracles") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed + 1000);
    const int n = 3 + static_cast<int>(rng.unit() * 6.0);
    const int meq = 1 + static_cast<int>(rng.unit() * (n - 1));
    MatrixXd B = oracles::gauss_matrix(rng, n, n);
    MatrixXd H = B.transpose() * B;  // PSD, possibly near-singular
    if (rng.unit() < 0.5) {
      H += 0.5 * MatrixXd::Identity(n, n);
    }
    VectorXd g = oracles::gauss_vector(rng, n);
    MatrixXd A = oracles::gauss_matrix(rng, meq, n);
    VectorXd b = A * oracles::gauss_vector(rng, n);  // consistent by construction

    KktResult res = solve_kkt(H, g, A, b);
    CHECK(res.feasibility_residual <= 1e-9 * (1.0 + b.norm()));
    CHECK(res.stationarity_residual <= 1e-8 * (1.0 + g.norm() + H.norm()));

    // independent null-space route (QR based)
    VectorXd x_qr = oracles::kkt_nullspace_qr(H, g, A, b);
    const double f_ours = 0.5 * res.x.dot(H * res.x) + g.dot(res.x);
    const double f_qr = 0.5 * x_qr.dot(H * x_qr) + g.dot(x_qr);
    CHECK(f_ours <= f_qr + 1e-8 * (1.0 + std::abs(f_qr)));
    if (!res.hessian_singular) {
      CHECK((res.x - x_qr).norm() <= 1e-8 * (1.0 + x_qr.norm()));
      VectorXd x_saddle = oracles::kkt_saddle(H, g, A, b);
      CHECK((res.x - x_saddle).norm() <= 1e-8 * (1.0 + x_saddle.norm()));
    }
  }
}

TEST_CASE("solve_kkt: grid refinement agreement in one free dimension") {
  // one equality row in R^2 leaves a line; scan it densely
  MatrixXd H(2, 2);
  H << 3.0, 1.0, 1.0, 2.0;
  VectorXd g(2);
  g << -1.0, 0.5;
  MatrixXd A(1, 2);
  A << 1.0, 1.0;
  VectorXd b(1);
  b << 1.0;
  KktResult res = solve_kkt(H, g, A, b);

  VectorXd x0(2), d(2);
  x0 << 1.0, 0.0;
  d << 1.0, -1.0;  // direction along the constraint
  double best_t = 0.0, best_f = 1e300;
  for (int i = 0; i <= 400000; ++i) {
    const double t = -20.0 + i * 1e-4;
    VectorXd x = x0 + t * d;
    const double f = 0.5 * x.dot(H * x) + g.dot(x);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  VectorXd x_grid = x0 + best_t * d;
  CHECK((res.x - x_grid).norm() < 1e-3);
  const double f_res = 0.5 * res.x.dot(H * res.x) + g.dot(res.x);
  CHECK(f_res <= best_f + 1e-9);
}

TEST_CASE("solve_kkt: inconsistent constraints raise") {
  MatrixXd A(2, 2);
  A << 1.0, 0.0, 1.0, 0.0;  // duplicated row
  VectorXd b(2);
  b << 1.0, 2.0;  // contradictory
  CHECK_THROWS_AS(solve_kkt(MatrixXd::Identity(2, 2), VectorXd::Zero(2), A, b),
                  InfeasibleError);
}
