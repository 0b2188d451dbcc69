#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ddpc/fixtures.hpp"
#include "ddpc/implicit_predictor.hpp"
#include "ddpc/linear_core.hpp"
#include "ddpc/ocp_solver.hpp"
#include "ddpc/predictors.hpp"
#include "ddpc/regularizers.hpp"
#include "ddpc/trajectory_data.hpp"

namespace py = pybind11;
using namespace ddpc;

namespace {

Dims dims_from_kwargs(int m, int p, std::optional<int> n, int N_p, int N_f,
                      const std::string& mode) {
  Dims dims;
  dims.m = m;
  dims.p = p;
  dims.n = n;
  dims.N_p = N_p;
  dims.N_f = N_f;
  dims.mode = data_mode_from_string(mode);
  return dims;
}

}  // namespace

PYBIND11_MODULE(_ddpc, m) {
  m.doc() = "regularized data-driven predictive control core";

  py::register_exception<InfeasibleError>(m, "Infeasible");

  py::class_<Dims>(m, "Dims")
      .def(py::init(&dims_from_kwargs), py::arg("m") = 1, py::arg("p") = 1,
           py::arg("n") = std::nullopt, py::arg("N_p") = 1, py::arg("N_f") = 1,
           py::arg("mode") = "io")
      .def_readonly("m", &Dims::m)
      .def_readonly("p", &Dims::p)
      .def_readonly("N_p", &Dims::N_p)
      .def_readonly("N_f", &Dims::N_f)
      .def_readonly("ell", &Dims::ell)
      .def_property_readonly("mode", [](const Dims& d) { return to_string(d.mode); });

  py::class_<DataMatrix>(m, "DataMatrix")
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, Eigen::MatrixXd, Dims>(),
           py::arg("W"), py::arg("U"), py::arg("Y"), py::arg("dims"))
      .def_property_readonly("W", &DataMatrix::W)
      .def_property_readonly("U", &DataMatrix::U)
      .def_property_readonly("Y", &DataMatrix::Y)
      .def_property_readonly("Z", &DataMatrix::Z)
      .def_property_readonly("D", &DataMatrix::D)
      .def_property_readonly("dims", &DataMatrix::dims)
      .def("augment_ones", &DataMatrix::augment_ones);

  py::class_<SystemModel>(m, "SystemModel")
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, double>(), py::arg("A"),
           py::arg("B"), py::arg("noise_std") = 0.0)
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, Eigen::MatrixXd,
                    Eigen::MatrixXd, Eigen::VectorXd, Eigen::VectorXd, double>(),
           py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"), py::arg("e"),
           py::arg("r"), py::arg("noise_std") = 0.0)
      .def("is_lti", &SystemModel::is_lti);

  m.def(
      "simulate",
      [](const SystemModel& model, const Eigen::VectorXd& x0,
         const Eigen::MatrixXd& u, std::uint64_t seed) {
        SimResult res = simulate(model, x0, u, seed);
        return py::make_tuple(res.x, res.y, res.x_true, res.y_true);
      },
      py::arg("model"), py::arg("x0"), py::arg("u"), py::arg("seed") = 0,
      "returns (x_measured, y_measured, x_true, y_true)");

  py::enum_<DataMode>(m, "DataMode")
      .value("io", DataMode::io)
      .value("statespace", DataMode::statespace);
  m.def("build_hankel", &build_hankel, py::arg("u_data"), py::arg("y_data"),
        py::arg("N_p"), py::arg("N_f"),
        py::arg("mode") = DataMode::io);

  py::class_<RankReport>(m, "RankReport")
      .def_readonly("rank_D", &RankReport::rank_D)
      .def_readonly("rank_Z", &RankReport::rank_Z)
      .def_readonly("rank_W", &RankReport::rank_W)
      .def_readonly("gpe_satisfied", &RankReport::gpe_satisfied)
      .def_readonly("full_row_rank_D", &RankReport::full_row_rank_D)
      .def_readonly("rank_deficiency_holds", &RankReport::rank_deficiency_holds)
      .def_readonly("tolerance", &RankReport::tolerance);

  m.def("rank_report", &rank_report, py::arg("data"), py::arg("n") = std::nullopt,
        py::arg("tolerance") = kDefaultRankTol);
  m.def("affine_rank_report", &affine_rank_report, py::arg("data"),
        py::arg("n") = std::nullopt, py::arg("tolerance") = kDefaultRankTol);

  m.def("pinv", &pinv, py::arg("M"), py::arg("tolerance") = kDefaultRankTol,
        py::arg("scale_anchor") = 0.0);
  m.def(
      "projectors",
      [](const Eigen::MatrixXd& Z, double tol) {
        ProjectorPair p = projectors(Z, tol);
        return py::make_tuple(p.Pi, p.Pi_perp);
      },
      py::arg("Z"), py::arg("tolerance") = kDefaultRankTol);

  py::class_<LeastSquaresPredictor>(m, "LeastSquaresPredictor")
      .def_readonly("G_LS", &LeastSquaresPredictor::G_LS)
      .def_readonly("K_LS", &LeastSquaresPredictor::K_LS)
      .def_readonly("E_y", &LeastSquaresPredictor::E_y)
      .def_readonly("E_u", &LeastSquaresPredictor::E_u)
      .def_readonly("Q_reg", &LeastSquaresPredictor::Q_reg)
      .def_readonly("R_reg", &LeastSquaresPredictor::R_reg)
      .def_readonly("WWt_inv", &LeastSquaresPredictor::WWt_inv)
      .def("predict_y", &LeastSquaresPredictor::predict_y)
      .def("predict_u", &LeastSquaresPredictor::predict_u);
  m.def("fit_ls", &fit_ls, py::arg("data"), py::arg("tolerance") = kDefaultRankTol);

  py::class_<AffineLeastSquaresPredictor>(m, "AffineLeastSquaresPredictor")
      .def_readonly("G_ALS", &AffineLeastSquaresPredictor::G_ALS)
      .def_readonly("g_ALS", &AffineLeastSquaresPredictor::g_ALS)
      .def_readonly("K_ALS", &AffineLeastSquaresPredictor::K_ALS)
      .def_readonly("k_ALS", &AffineLeastSquaresPredictor::k_ALS)
      .def("predict_y", &AffineLeastSquaresPredictor::predict_y)
      .def("predict_u", &AffineLeastSquaresPredictor::predict_u);
  m.def("fit_als", &fit_als, py::arg("data"), py::arg("tolerance") = kDefaultRankTol);

  py::class_<Regularizer>(m, "Regularizer")
      .def_static("parse", &Regularizer::parse)
      .def_static("quadratic", &Regularizer::quadratic)
      .def_static("projection_perp", &Regularizer::projection_perp)
      .def_static("projection_par", &Regularizer::projection_par)
      .def_static("mixed", &Regularizer::mixed)
      .def_static("offset", &Regularizer::offset)
      .def_static("gamma", &Regularizer::gamma, py::arg("l2"), py::arg("l3"),
                  py::arg("gamma3_zero") = false)
      .def_static("slack", &Regularizer::slack)
      .def_static("general", &Regularizer::general)
      .def_readwrite("affine", &Regularizer::affine)
      .def("to_spec", &Regularizer::to_spec);

  py::class_<TrajectoryTuple>(m, "TrajectoryTuple")
      .def(py::init([](Eigen::VectorXd xi, Eigen::VectorXd u, Eigen::VectorXd y) {
             return TrajectoryTuple{std::move(xi), std::move(u), std::move(y)};
           }),
           py::arg("xi"), py::arg("u"), py::arg("y"))
      .def_readonly("xi", &TrajectoryTuple::xi)
      .def_readonly("u", &TrajectoryTuple::u)
      .def_readonly("y", &TrajectoryTuple::y);

  py::class_<TrajectoryCostBreakdown>(m, "TrajectoryCostBreakdown")
      .def_readonly("total", &TrajectoryCostBreakdown::total)
      .def_readonly("term_y", &TrajectoryCostBreakdown::term_y)
      .def_readonly("term_u", &TrajectoryCostBreakdown::term_u)
      .def_readonly("term_xi", &TrajectoryCostBreakdown::term_xi)
      .def_readonly("closed_form", &TrajectoryCostBreakdown::closed_form);

  m.def("trajectory_cost",
        py::overload_cast<const Regularizer&, const LeastSquaresPredictor&,
                          const DataMatrix&, const TrajectoryTuple&>(&trajectory_cost),
        py::arg("reg"), py::arg("predictor"), py::arg("data"), py::arg("w"));
  m.def("trajectory_cost_affine",
        py::overload_cast<const Regularizer&, const AffineLeastSquaresPredictor&,
                          const DataMatrix&, const TrajectoryTuple&>(&trajectory_cost),
        py::arg("reg"), py::arg("predictor"), py::arg("data"), py::arg("w"));

  m.def(
      "brute_force_cost",
      [](const Regularizer& reg, const DataMatrix& data, const TrajectoryTuple& w,
         bool affine) {
        BruteForceResult r = brute_force_cost(reg, data, w, affine);
        return py::make_tuple(r.cost, r.a, r.sigma);
      },
      py::arg("reg"), py::arg("data"), py::arg("w"), py::arg("affine") = false,
      "returns (cost, a, sigma)");

  py::class_<ControlObjective>(m, "ControlObjective")
      .def(py::init([](Eigen::MatrixXd Q, Eigen::VectorXd y_ref, Eigen::MatrixXd R_u,
                       Eigen::VectorXd u_ref) {
             ControlObjective obj;
             obj.Q = std::move(Q);
             obj.y_ref = std::move(y_ref);
             obj.R_u = std::move(R_u);
             obj.u_ref = std::move(u_ref);
             return obj;
           }),
           py::arg("Q"), py::arg("y_ref"), py::arg("R_u"), py::arg("u_ref"))
      .def_static("tracking", &ControlObjective::tracking, py::arg("Q_step"),
                  py::arg("N_f"), py::arg("y_ref"), py::arg("R_u"), py::arg("u_ref"));

  py::class_<Box>(m, "Box")
      .def(py::init([](Eigen::VectorXd lo, Eigen::VectorXd hi) {
             return Box{std::move(lo), std::move(hi)};
           }),
           py::arg("lo"), py::arg("hi"));

  py::class_<TerminalEquality>(m, "TerminalEquality")
      .def_static("last_steps", &TerminalEquality::last_steps, py::arg("steps"),
                  py::arg("block_rows"), py::arg("y_dim"), py::arg("y_ref"));

  py::class_<ConstraintSet>(m, "ConstraintSet")
      .def(py::init<>())
      .def_readwrite("u_box", &ConstraintSet::u_box)
      .def_readwrite("y_box", &ConstraintSet::y_box)
      .def_readwrite("terminal", &ConstraintSet::terminal);

  py::class_<DPCProblem>(m, "DPCProblem")
      .def(py::init([](DataMatrix data, ControlObjective obj, ConstraintSet cons,
                       Regularizer reg, Eigen::VectorXd xi) {
             return DPCProblem{std::move(data), std::move(obj), std::move(cons),
                               std::move(reg), std::move(xi)};
           }),
           py::arg("data"), py::arg("objective"),
           py::arg("constraints") = ConstraintSet{}, py::arg("regularizer"),
           py::arg("xi"))
      .def_readwrite("xi", &DPCProblem::xi)
      .def_readwrite("regularizer", &DPCProblem::regularizer);

  py::class_<DPCSolution>(m, "DPCSolution")
      .def_readonly("u", &DPCSolution::u)
      .def_readonly("y", &DPCSolution::y)
      .def_readonly("a", &DPCSolution::a)
      .def_readonly("sigma", &DPCSolution::sigma)
      .def_readonly("value", &DPCSolution::value)
      .def_readonly("non_unique", &DPCSolution::non_unique)
      .def_property_readonly(
          "status", [](const DPCSolution& s) { return to_string(s.status); });

  m.def("solve_full", &solve_full, py::arg("problem"));
  m.def("solve_reduced", &solve_reduced, py::arg("problem"));
  m.def(
      "feasible",
      [](const DPCProblem& prob) {
        FeasibilityReport rep = feasible(prob);
        py::dict d;
        d["feasible"] = rep.feasible;
        d["full_row_rank"] = rep.full_row_rank;
        d["xi_image_residual"] = rep.xi_image_residual;
        d["reason"] = rep.reason;
        return d;
      },
      py::arg("problem"));

  py::class_<ImplicitPredictorMap>(m, "ImplicitPredictorMap")
      .def_readonly("M_xi", &ImplicitPredictorMap::M_xi)
      .def_readonly("M_u", &ImplicitPredictorMap::M_u)
      .def_readonly("c", &ImplicitPredictorMap::c)
      .def("eval", &ImplicitPredictorMap::eval);

  m.def("implicit_unconstrained", &implicit_unconstrained, py::arg("predictor"),
        py::arg("Q"), py::arg("y_ref"), py::arg("lambda_"));
  m.def("implicit_affine", &implicit_affine, py::arg("predictor"), py::arg("Q"),
        py::arg("y_ref"), py::arg("lambda_"));
  m.def(
      "implicit_terminal",
      [](const LeastSquaresPredictor& P, const ControlObjective& obj, double lambda,
         int n_terminal) {
        auto [map, weights] = implicit_terminal(P, obj, lambda, n_terminal);
        return py::make_tuple(map, weights.Lambda_ref, weights.Lambda_reg);
      },
      py::arg("predictor"), py::arg("objective"), py::arg("lambda_"),
      py::arg("n_terminal"), "returns (map, Lambda_ref, Lambda_reg)");

  m.def(
      "lq_decompose",
      [](const DataMatrix& data) {
        LQFactors f = lq_decompose(data);
        return py::make_tuple(f.L, f.Q);
      },
      py::arg("data"));
  m.def(
      "gamma_from_trajectory",
      [](const DataMatrix& data, const TrajectoryTuple& w) {
        GammaCoordinates g = gamma_from_trajectory(lq_decompose(data), w);
        return py::make_tuple(g.gamma1, g.gamma2, g.gamma3);
      },
      py::arg("data"), py::arg("w"));

  m.def("slack_augment",
        [](const DataMatrix& data, double lambda, double lambda_sigma) {
          SlackAugmentation aug = slack_augment(data, lambda, lambda_sigma);
          return py::make_tuple(aug.data, aug.n_slack, aug.column_scale);
        });
  m.def("rescale_weights", &rescale_weights, py::arg("lambdas"), py::arg("ell_old"),
        py::arg("ell_new"));

  m.def("example_system", &fixtures::example_system, py::arg("noise_std") = 0.0);
  m.def("example_cloud_data", &fixtures::example_cloud_data, py::arg("n_samples"),
        py::arg("noise_std"), py::arg("seed"));
  m.def("example_hankel_short", &fixtures::example_hankel_short);
  m.def("example_hankel_long", &fixtures::example_hankel_long);
}
