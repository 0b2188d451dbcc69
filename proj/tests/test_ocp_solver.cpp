#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ddpc/fixtures.hpp"
#include "ddpc/implicit_predictor.hpp"
#include "ddpc/linear_core.hpp"
#include "ddpc/ocp_solver.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace ddpc;

namespace {

// scalar tracking problem on the bundled short Hankel data
DPCProblem example_problem(double lambda, Regularizer reg) {
  DataMatrix data = fixtures::example_hankel_short();
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Zero(1);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  (void)lambda;
  DPCProblem prob{std::move(data), std::move(obj), ConstraintSet{}, std::move(reg),
                  VectorXd::Zero(1)};
  return prob;
}

}  // namespace

TEST_CASE("unconstrained, lambda = 0: references are attained exactly") {
  DPCProblem prob = fixtures::random_problem(5, Regularizer::quadratic(0.0));
  DPCSolution sol = solve_full(prob);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK((sol.u - prob.objective.u_ref).norm() <= 1e-8 * (1.0 + prob.objective.u_ref.norm()));
  CHECK((sol.y - prob.objective.y_ref).norm() <= 1e-8 * (1.0 + prob.objective.y_ref.norm()));
  CHECK(std::abs(sol.value) <= 1e-10 * (1.0 + std::abs(sol.value)));
  CHECK(sol.non_unique);  // generator direction is free
}

TEST_CASE("large lambda pushes the input to the least-squares controller") {
  DPCProblem prob = fixtures::random_problem(6, Regularizer::quadratic(1.0));
  LeastSquaresPredictor P = fit_ls(prob.data);
  const VectorXd u_ls = P.predict_u(prob.xi);
  double prev = 1e300;
  for (double lambda : {1e2, 1e4, 1e6, 1e9, 1e12}) {
    prob.regularizer = Regularizer::quadratic(lambda);
    DPCSolution sol = solve_full(prob);
    REQUIRE(sol.status == SolveStatus::optimal);
    const double dist = (sol.u - u_ls).norm();
    CHECK(dist <= prev * 1.01);
    prev = dist;
  }
  CHECK(prev <= 1e-6 * (1.0 + u_ls.norm()));
}

TEST_CASE("solution value matches the objective at the reported point") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    DPCProblem prob = fixtures::random_problem(seed, Regularizer::mixed(0.2, 8.0));
    DPCSolution sol = solve_full(prob);
    REQUIRE(sol.status == SolveStatus::optimal);
    const double h = brute_force_cost(prob.regularizer, prob.data,
                                      TrajectoryTuple{prob.xi, sol.u, sol.y})
                         .cost;
    const double recomputed = prob.objective.eval(sol.u, sol.y) + h;
    CHECK(std::abs(sol.value - recomputed) <= 1e-9 * (1.0 + std::abs(recomputed)));
    CHECK(sol.diagnostics.stationarity <= 1e-7);
  }
}

TEST_CASE("full and reduced solves agree for every closed-form variant") {
  std::vector<Regularizer> regs = {
      Regularizer::quadratic(2.0),      Regularizer::projection_perp(5.0),
      Regularizer::projection_par(0.7), Regularizer::mixed(0.3, 20.0),
      Regularizer::gamma(0.5, 10.0),    Regularizer::slack(1.0, 10.0),
  };
  int idx = 0;
  for (const Regularizer& reg : regs) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      DPCProblem prob = fixtures::random_problem(seed * 13 + idx, reg);
      DPCSolution full = solve_full(prob);
      DPCSolution reduced = solve_reduced(prob);
      REQUIRE(full.status == SolveStatus::optimal);
      REQUIRE(reduced.status == SolveStatus::optimal);
      CHECK(std::abs(full.value - reduced.value) <=
            1e-8 * (1.0 + std::abs(full.value)));
      CHECK((full.u - reduced.u).norm() <= 1e-6 * (1.0 + full.u.norm()));
      CHECK((full.y - reduced.y).norm() <= 1e-6 * (1.0 + full.y.norm()));
    }
    ++idx;
  }
}

TEST_CASE("full/reduced agreement with an offset regularizer") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    DPCProblem prob = fixtures::random_problem(seed + 40, Regularizer::quadratic(1.0));
    Rng rng(seed);
    VectorXd a_bar = oracles::gauss_vector(rng, static_cast<int>(prob.data.cols()));
    prob.regularizer = Regularizer::offset(1.4, a_bar);
    DPCSolution full = solve_full(prob);
    DPCSolution reduced = solve_reduced(prob);
    CHECK(std::abs(full.value - reduced.value) <= 1e-8 * (1.0 + std::abs(full.value)));
    CHECK((full.u - reduced.u).norm() <= 1e-6 * (1.0 + full.u.norm()));
  }
}

TEST_CASE("full/reduced agreement for affine regularization") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Regularizer reg = Regularizer::quadratic(2.2);
    reg.affine = true;
    DPCProblem prob = fixtures::random_problem(seed + 60, reg);
    DPCSolution full = solve_full(prob);
    DPCSolution reduced = solve_reduced(prob);
    REQUIRE(full.status == SolveStatus::optimal);
    CHECK(std::abs(full.value - reduced.value) <= 1e-8 * (1.0 + std::abs(full.value)));
    CHECK((full.u - reduced.u).norm() <= 1e-6 * (1.0 + full.u.norm()));
    // affine combination actually holds
    CHECK(full.a.sum() == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("general weighted regularizer solves through the full path") {
  // S = I reproduces the plain quadratic problem at lambda = 1
  DPCProblem prob = fixtures::random_problem(90, Regularizer::quadratic(1.0));
  DPCSolution quad = solve_full(prob);
  prob.regularizer =
      Regularizer::general(MatrixXd::Identity(prob.data.cols(), prob.data.cols()));
  DPCSolution gen = solve_full(prob);
  REQUIRE(gen.status == SolveStatus::optimal);
  CHECK(std::abs(gen.value - quad.value) <= 1e-8 * (1.0 + std::abs(quad.value)));
  CHECK((gen.u - quad.u).norm() <= 1e-7 * (1.0 + quad.u.norm()));
  // the reduced path refuses: no closed form
  CHECK_THROWS_AS(solve_reduced(prob), std::invalid_argument);
}

TEST_CASE("gamma with pinned third block equals the hard-constrained solve") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DPCProblem prob =
        fixtures::random_problem(seed + 80, Regularizer::gamma(0.8, 0.0, true));
    DPCSolution full = solve_full(prob);
    DPCSolution reduced = solve_reduced(prob);
    REQUIRE(full.status == SolveStatus::optimal);
    CHECK(std::abs(full.value - reduced.value) <= 1e-8 * (1.0 + std::abs(full.value)));
    // predictions sit on the least-squares predictor
    LeastSquaresPredictor P = fit_ls(prob.data);
    CHECK((full.y - P.predict_y(prob.xi, full.u)).norm() <=
          1e-7 * (1.0 + full.y.norm()));
  }
}

TEST_CASE("box constraints: active bounds, KKT quality, active set reported") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DPCProblem prob = fixtures::random_problem(seed + 300, Regularizer::quadratic(0.5));
    const int nu = prob.data.u_rows();
    const int ny = prob.data.y_rows();
    // tight boxes around zero force activity for most references
    prob.constraints.u_box = Box{VectorXd::Constant(nu, -0.1), VectorXd::Constant(nu, 0.1)};
    prob.constraints.y_box = Box{VectorXd::Constant(ny, -0.2), VectorXd::Constant(ny, 0.2)};
    DPCSolution sol = solve_full(prob);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(prob.constraints.u_box->contains(sol.u, 1e-8));
    CHECK(prob.constraints.y_box->contains(sol.y, 1e-8));
    CHECK(sol.diagnostics.feasibility <= 1e-8);
    CHECK(sol.diagnostics.complementarity <= 1e-8);
    CHECK(sol.diagnostics.stationarity <= 1e-6);

    // agreement with the reduced path under boxes
    DPCSolution red = solve_reduced(prob);
    CHECK(std::abs(sol.value - red.value) <= 1e-7 * (1.0 + std::abs(sol.value)));
  }
}

TEST_CASE("box-constrained scalar instance against golden-section refinement") {
  DPCProblem prob = example_problem(1.0, Regularizer::quadratic(1.0));
  VectorXd xi(1);
  xi << 0.8;
  prob.xi = xi;
  // the unconstrained input optimum is ~0.187, so this upper bound binds
  const double u_lo = -0.25, u_hi = 0.1;
  prob.constraints.u_box = Box{VectorXd::Constant(1, u_lo), VectorXd::Constant(1, u_hi)};
  DPCSolution sol = solve_full(prob);
  REQUIRE(sol.status == SolveStatus::optimal);

  // profile in u: eliminate y by golden section on the convex inner cost
  auto inner = [&](double u) {
    auto phi = [&](double y) {
      TrajectoryTuple w{xi, VectorXd::Constant(1, u), VectorXd::Constant(1, y)};
      return y * y + u * u + brute_force_cost(prob.regularizer, prob.data, w).cost;
    };
    double a = -4.0, b = 4.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = phi(c), fd = phi(d);
    for (int it = 0; it < 200; ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - gr * (b - a);
        fc = phi(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + gr * (b - a);
        fd = phi(d);
      }
    }
    return phi(0.5 * (a + b));
  };
  double a = u_lo, b = u_hi;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = inner(c), fd = inner(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = inner(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = inner(d);
    }
  }
  const double u_best = 0.5 * (a + b);
  const double f_best = inner(u_best);

  CHECK(std::abs(sol.u(0) - u_best) <= 1e-6);
  CHECK(sol.value <= f_best + 1e-8 * (1.0 + std::abs(f_best)));
  // bound is active and reported
  CHECK(sol.u(0) == doctest::Approx(u_hi).epsilon(1e-10));
  REQUIRE(sol.active_set.size() == 1);
  CHECK(sol.active_set[0] == 0);
}

TEST_CASE("terminal equality rows are honored") {
  DataMatrix data = fixtures::example_hankel_long();
  VectorXd y_ref(2);
  y_ref << 0.5, 0.5;
  ControlObjective obj = ControlObjective::tracking(
      MatrixXd::Identity(1, 1), 2, y_ref, MatrixXd::Zero(2, 2), VectorXd::Zero(2));
  ConstraintSet cons;
  cons.terminal = TerminalEquality::last_steps(1, 1, 2, y_ref);
  DPCProblem prob{std::move(data), std::move(obj), std::move(cons),
                  Regularizer::quadratic(1.0), VectorXd::Constant(1, -0.3)};
  DPCSolution sol = solve_full(prob);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.y(1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("feasibility: full-row-rank instances accept every state") {
  DPCProblem prob = fixtures::random_problem(123, Regularizer::quadratic(1.0));
  prob.constraints.u_box = Box{VectorXd::Constant(prob.data.u_rows(), -1.0),
                               VectorXd::Constant(prob.data.u_rows(), 1.0)};
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    prob.xi = oracles::gauss_vector(rng, prob.data.w_rows());
    FeasibilityReport rep = feasible(prob);
    CHECK(rep.feasible);
    CHECK(rep.full_row_rank);
    DPCSolution sol = solve_full(prob);
    CHECK(sol.status == SolveStatus::optimal);
  }
}

TEST_CASE("feasibility: rank-deficient data rejects states off the image") {
  // two columns, three-dimensional state block
  Dims dims;
  dims.m = 1;
  dims.p = 1;
  dims.N_p = 1;
  dims.N_f = 1;
  dims.mode = DataMode::statespace;
  dims.n = 3;
  Rng rng(3);
  MatrixXd W = oracles::gauss_matrix(rng, 3, 2);
  MatrixXd U = oracles::gauss_matrix(rng, 1, 2);
  MatrixXd Y = oracles::gauss_matrix(rng, 3, 2);
  DataMatrix data(W, U, Y, dims);

  // xi orthogonal to the image of W
  Eigen::FullPivLU<MatrixXd> lu(W.transpose());
  VectorXd xi = lu.kernel().col(0);

  ControlObjective obj;
  obj.Q = MatrixXd::Identity(3, 3);
  obj.y_ref = VectorXd::Zero(3);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  DPCProblem prob{std::move(data), std::move(obj), ConstraintSet{},
                  Regularizer::quadratic(1.0), xi};
  FeasibilityReport rep = feasible(prob);
  CHECK(!rep.feasible);
  CHECK(rep.checked_xi_image);
  CHECK(rep.xi_image_residual > 1e-3);
  DPCSolution sol = solve_full(prob);
  CHECK(sol.status == SolveStatus::infeasible);
  CHECK(sol.infeasibility_residual > 0.0);
}

TEST_CASE("feasibility: explicit state set decides membership") {
  DPCProblem prob = fixtures::random_problem(321, Regularizer::quadratic(1.0));
  const int wr = prob.data.w_rows();
  prob.constraints.xi_set = Polyhedron::box(VectorXd::Constant(wr, -1.0),
                                            VectorXd::Constant(wr, 1.0));
  prob.xi = VectorXd::Constant(wr, 2.0);
  FeasibilityReport rep = feasible(prob);
  CHECK(!rep.feasible);
  CHECK(rep.xi_set_checked);
  CHECK(!rep.xi_in_state_set);

  prob.xi = VectorXd::Constant(wr, 0.5);
  CHECK(feasible(prob).feasible);
}

TEST_CASE("deterministic plant: exact data with no regularization matches MPC") {
  // noiseless cloud satisfies the excitation condition with the rank deficiency
  DataMatrix data = fixtures::example_cloud_data(50, 0.0, 17);
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Constant(1, 0.3);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  VectorXd xi = VectorXd::Constant(1, 0.9);
  DPCProblem prob{data, obj, ConstraintSet{}, Regularizer::quadratic(0.0), xi};
  DPCSolution sol = solve_full(prob);
  REQUIRE(sol.status == SolveStatus::optimal);

  auto mpc = oracles::mpc_from_model(
      (MatrixXd(1, 1) << 2.0).finished(), (MatrixXd(1, 1) << -0.5).finished(), 1,
      xi, obj.Q, obj.y_ref, obj.R_u, obj.u_ref);
  CHECK(std::abs(sol.value - mpc.value) <= 1e-8 * (1.0 + std::abs(mpc.value)));
  CHECK((sol.u - mpc.u).norm() <= 1e-8 * (1.0 + mpc.u.norm()));
  CHECK((sol.y - mpc.x).norm() <= 1e-8 * (1.0 + mpc.x.norm()));
}

TEST_CASE("closed loop: one step tracks better than the open plant") {
  DataMatrix data = fixtures::example_hankel_short();
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Zero(1);
  obj.R_u = MatrixXd::Zero(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  DPCProblem prob{data, obj, ConstraintSet{}, Regularizer::mixed(1e-3, 1e6),
                  VectorXd::Constant(1, 0.7)};
  SystemModel plant = fixtures::example_system();
  ClosedLoopStep step = closed_loop_step(prob, plant, 99);
  // uncontrolled plant doubles the state; the controlled step must beat it
  CHECK(std::abs(step.next_plant_state(0)) < std::abs(2.0 * 0.7));
  CHECK(std::abs(step.next_plant_state(0)) < std::abs(prob.xi(0)));
}

TEST_CASE("closed loop: exact data, no regularization reproduces the MPC step") {
  DataMatrix data = fixtures::example_cloud_data(50, 0.0, 17);
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Zero(1);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  VectorXd xi = VectorXd::Constant(1, -0.4);
  DPCProblem prob{data, obj, ConstraintSet{}, Regularizer::quadratic(0.0), xi};
  SystemModel plant = fixtures::example_system();
  ClosedLoopStep step = closed_loop_step(prob, plant, 1);
  auto mpc = oracles::mpc_from_model(plant.A(), plant.B(), 1, xi, obj.Q, obj.y_ref,
                                     obj.R_u, obj.u_ref);
  CHECK((step.applied_input - mpc.u).norm() <= 1e-8 * (1.0 + mpc.u.norm()));
  CHECK(step.next_xi(0) ==
        doctest::Approx(2.0 * xi(0) - 0.5 * mpc.u(0)).epsilon(1e-9));
}

TEST_CASE("closed loop: io-mode window rolls past inputs and outputs") {
  Rng rng(12);
  SystemModel plant = fixtures::example_system();
  MatrixXd u = oracles::gauss_matrix(rng, 1, 20);
  SimResult sim = simulate(plant, VectorXd::Zero(1), u, 5);
  DataMatrix data = build_hankel(u, sim.y, 2, 1);
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Zero(1);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  // consistent past window: y_{k-1} = 2 y_{k-2} - 0.5 u_{k-2}
  VectorXd xi(4);
  xi << 0.1, 0.2, 0.3, 0.55;  // (u_p, y_p)
  DPCProblem prob{data, obj, ConstraintSet{}, Regularizer::quadratic(1.0), xi};
  VectorXd plant_state = VectorXd::Constant(1, 0.55);
  ClosedLoopStep step = closed_loop_step(prob, plant, plant_state, 3);
  CHECK(step.next_xi(0) == doctest::Approx(0.2));       // shifted u_p
  CHECK(step.next_xi(1) == step.applied_input(0));      // appended input
  CHECK(step.next_xi(2) == doctest::Approx(0.55));      // shifted y_p
  CHECK(step.next_xi(3) == doctest::Approx(0.55));      // measured output (C = I)
}

TEST_CASE("closed loop: multi-step rollout converges toward the reference") {
  // noisy data, strong output-deviation regularization, ten receding steps
  DataMatrix data = fixtures::example_hankel_short();
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Zero(1);
  obj.R_u = 0.05 * MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  DPCProblem prob{data, obj, ConstraintSet{}, Regularizer::mixed(1e-4, 1e6),
                  VectorXd::Constant(1, 0.9)};
  SystemModel plant = fixtures::example_system();
  double x = 0.9;
  for (int k = 0; k < 10; ++k) {
    prob.xi = VectorXd::Constant(1, x);
    ClosedLoopStep step = closed_loop_step(prob, plant, 1000 + k);
    x = step.next_plant_state(0);
  }
  CHECK(std::abs(x) < 0.05);  // the open plant would have grown by 2^10
}

TEST_CASE("closed loop: empty input horizon is rejected") {
  DataMatrix data = fixtures::example_hankel_short();
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(1, 1);
  obj.y_ref = VectorXd::Zero(1);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  DPCProblem prob{data, obj, ConstraintSet{}, Regularizer::quadratic(1.0),
                  VectorXd::Zero(1)};
  // a plant with more inputs than the data horizon provides
  SystemModel wide_plant(MatrixXd::Identity(1, 1), MatrixXd::Ones(1, 2), 0.0);
  CHECK_THROWS_AS(closed_loop_step(prob, wide_plant, 1), std::invalid_argument);
}

TEST_CASE("problem validation rejects inconsistent pieces") {
  DPCProblem prob = fixtures::random_problem(31, Regularizer::quadratic(1.0));
  prob.xi = VectorXd::Zero(prob.data.w_rows() + 1);
  CHECK_THROWS_AS(solve_full(prob), std::invalid_argument);

  DPCProblem prob2 = fixtures::random_problem(31, Regularizer::quadratic(1.0));
  prob2.constraints.u_box =
      Box{VectorXd::Constant(prob2.data.u_rows(), 1.0),
          VectorXd::Constant(prob2.data.u_rows(), -1.0)};  // empty box
  CHECK_THROWS_AS(solve_full(prob2), std::invalid_argument);
}
