#include "cli_commands.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ddpc/fixtures.hpp"
#include "ddpc/implicit_predictor.hpp"
#include "ddpc/io.hpp"
#include "ddpc/linear_core.hpp"
#include "ddpc/ocp_solver.hpp"
#include "ddpc/regularizers.hpp"

namespace ddpc::cli {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

VectorXd parse_vector_arg(const std::string& value) {
  std::vector<double> vals;
  if (!value.empty() && value.front() == '@') {
    std::ifstream in(value.substr(1));
    if (!in) throw std::invalid_argument("cannot open " + value.substr(1));
    std::string line;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) vals.push_back(std::stod(item));
      }
    }
  } else if (!value.empty() && value.front() == '[') {
    std::stringstream ss(value.substr(1, value.size() - 2));
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (!item.empty()) vals.push_back(std::stod(item));
    }
  } else {
    throw std::invalid_argument("expected @file or [v;v;...], got " + value);
  }
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

struct GridAxis {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  double at(int i) const {
    return count > 1 ? lo + (hi - lo) * i / (count - 1) : lo;
  }
};

// "lo:hi:n,lo:hi:n"
std::pair<GridAxis, GridAxis> parse_grid(const std::string& spec) {
  auto parse_axis = [](const std::string& s) {
    GridAxis ax;
    std::stringstream ss(s);
    std::string item;
    std::getline(ss, item, ':');
    ax.lo = std::stod(item);
    std::getline(ss, item, ':');
    ax.hi = std::stod(item);
    std::getline(ss, item, ':');
    ax.count = std::stoi(item);
    if (ax.count < 1) throw std::invalid_argument("grid axis needs >= 1 points");
    return ax;
  };
  const auto comma = spec.find(',');
  if (comma == std::string::npos) {
    throw std::invalid_argument("grid spec must have two axes: lo:hi:n,lo:hi:n");
  }
  return {parse_axis(spec.substr(0, comma)), parse_axis(spec.substr(comma + 1))};
}

int fail_validation(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitValidation;
}

SystemModel system_from_json(const json& j) {
  const MatrixXd A = io::matrix_from_json(j.at("A"));
  const MatrixXd B = io::matrix_from_json(j.at("B"));
  const double noise = j.value("noise_std", 0.0);
  if (!j.contains("C")) return SystemModel(A, B, noise);
  MatrixXd C = io::matrix_from_json(j.at("C"));
  MatrixXd D = j.contains("D") ? io::matrix_from_json(j.at("D"))
                               : MatrixXd(MatrixXd::Zero(C.rows(), B.cols()));
  VectorXd e = j.contains("e") ? io::vector_from_json(j.at("e"))
                               : VectorXd(VectorXd::Zero(A.rows()));
  VectorXd r = j.contains("r") ? io::vector_from_json(j.at("r"))
                               : VectorXd(VectorXd::Zero(C.rows()));
  return SystemModel(A, B, C, D, e, r, noise);
}

void write_data_bundle(const std::string& out_dir, const std::string& stem,
                       const DataMatrix& data, double tol) {
  io::write_data_csv(join(out_dir, stem + ".csv"), data);
  io::write_data_descriptor(join(out_dir, stem + ".json"), data);
  RankReport rep = rank_report(data, data.dims().n, tol);
  io::write_json(join(out_dir, stem + "_rank_report.json"),
                 io::rank_report_to_json(rep));
}

}  // namespace

int cmd_gen_data(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed_override, bool has_seed_override, double tol) {
  try {
    const json cfg = io::read_json(config_path);
    const std::uint64_t seed =
        has_seed_override ? seed_override : cfg.value("seed", 1ull);
    SystemModel model = system_from_json(cfg.at("system"));
    const json& spec = cfg.at("data");
    const std::string kind = spec.at("kind").get<std::string>();
    ensure_dir(out_dir);

    if (kind == "cloud") {
      const int samples = spec.at("samples").get<int>();
      if (samples < 1) throw std::invalid_argument("cloud needs at least one sample");
      if (model.n() != 1 || model.m() != 1) {
        throw std::invalid_argument("cloud generation is defined for the scalar system");
      }
      Rng rng(seed);
      std::vector<TrajectoryTuple> cols;
      for (int i = 0; i < samples; ++i) {
        VectorXd x0(1), u(1);
        x0 << rng.uniform(-1.0, 1.0);
        u << rng.uniform(-1.0, 1.0);
        SimResult sim = simulate(model, x0, u, rng);
        cols.push_back(TrajectoryTuple{sim.x.col(0), u, sim.x.col(1)});
      }
      DataMatrix data = build_from_columns(cols, fixtures::example_cloud_dims());
      write_data_bundle(out_dir, "data", data, tol);
    } else if (kind == "hankel") {
      const int T = spec.at("T").get<int>();
      const int N_p = spec.value("N_p", 1);
      const int N_f = spec.value("N_f", 1);
      const DataMode mode = data_mode_from_string(spec.value("mode", "io"));
      const double range = spec.value("input_range", 1.0);
      Rng rng(seed);
      MatrixXd u(model.m(), T);
      for (int i = 0; i < model.m(); ++i)
        for (int k = 0; k < T; ++k) u(i, k) = rng.uniform(-range, range);
      VectorXd x0 = spec.contains("x0") ? io::vector_from_json(spec.at("x0"))
                                        : VectorXd(VectorXd::Zero(model.n()));
      SimResult sim = simulate(model, x0, u, rng);
      DataMatrix data = mode == DataMode::io
                            ? build_hankel(u, sim.y, N_p, N_f, mode)
                            : build_hankel(u, sim.x, N_p, N_f, mode);
      write_data_bundle(out_dir, "data", data, tol);
    } else {
      throw std::invalid_argument("unknown data kind: " + kind);
    }
    json meta;
    meta["seed"] = seed;
    meta["config"] = config_path;
    io::write_json(join(out_dir, "provenance.json"), meta);
    return kExitOk;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int cmd_fit(const std::string& data_csv, const std::string& descriptor,
            const std::string& out_dir, double tol) {
  try {
    DataMatrix data = io::read_data(data_csv, descriptor);
    ensure_dir(out_dir);
    LeastSquaresPredictor P = fit_ls(data, tol);
    io::write_json(join(out_dir, "predictor.json"), io::predictor_to_json(P));
    AffineLeastSquaresPredictor Pa = fit_als(data, tol);
    io::write_json(join(out_dir, "predictor_affine.json"),
                   io::affine_predictor_to_json(Pa));

    Eigen::SelfAdjointEigenSolver<MatrixXd> eq(P.Q_reg), er(P.R_reg);
    json summary;
    summary["Q_reg_eigenvalues"] = io::vector_to_json(eq.eigenvalues());
    summary["R_reg_eigenvalues"] = io::vector_to_json(er.eigenvalues());
    summary["q_reg_full_rank"] = P.q_reg_full_rank;
    summary["r_reg_full_rank"] = P.r_reg_full_rank;
    summary["rank_report"] =
        io::rank_report_to_json(rank_report(data, data.dims().n, tol));
    io::write_json(join(out_dir, "fit_summary.json"), summary);
    return kExitOk;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int cmd_cost(const std::string& data_csv, const std::string& descriptor,
             const std::string& reg_spec, const std::string& w_value,
             const std::string& out_file, double tol) {
  try {
    DataMatrix data = io::read_data(data_csv, descriptor);
    Regularizer reg = Regularizer::parse(reg_spec);
    const VectorXd w_all = parse_vector_arg(w_value);
    TrajectoryTuple w =
        TrajectoryTuple::split(w_all, data.w_rows(), data.u_rows(), data.y_rows());
    json out;
    out["regularizer"] = reg.to_spec();
    if (reg.has_closed_form()) {
      if (reg.affine) {
        AffineLeastSquaresPredictor P = fit_als(data, tol);
        out["closed_form"] = io::breakdown_to_json(trajectory_cost(reg, P, data, w));
      } else {
        LeastSquaresPredictor P = fit_ls(data, tol);
        out["closed_form"] = io::breakdown_to_json(trajectory_cost(reg, P, data, w));
      }
    }
    BruteForceResult bf = brute_force_cost(reg, data, w, reg.affine, tol);
    out["brute_force"] = {{"cost", bf.cost},
                          {"feasibility_residual", bf.feasibility_residual}};
    if (reg.has_closed_form()) {
      const double closed = out["closed_form"]["total"].get<double>();
      out["agreement"] =
          std::abs(closed - bf.cost) <= 1e-7 * (1.0 + std::abs(bf.cost));
    }
    if (out_file.empty()) {
      std::cout << out.dump(2) << "\n";
    } else {
      io::write_json(out_file, out);
    }
    return kExitOk;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int cmd_solve(const std::string& problem_path, const std::string& out_file,
              bool reduced) {
  try {
    DPCProblem prob = io::problem_from_file(problem_path);
    DPCSolution sol = reduced ? solve_reduced(prob) : solve_full(prob);
    json out = io::solution_to_json(sol);
    if (out_file.empty()) {
      std::cout << out.dump(2) << "\n";
    } else {
      io::write_json(out_file, out);
    }
    return sol.status == SolveStatus::optimal ? kExitOk : kExitInfeasible;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int cmd_predictor(const std::string& data_csv, const std::string& descriptor,
                  const std::string& variant, double lambda,
                  const std::string& y_ref_value, int n_terminal,
                  const std::string& grid_spec, const std::string& out_dir,
                  double tol) {
  try {
    DataMatrix data = io::read_data(data_csv, descriptor);
    ensure_dir(out_dir);
    const int ny = data.y_rows();
    const VectorXd y_ref = y_ref_value.empty() ? VectorXd(VectorXd::Zero(ny))
                                               : parse_vector_arg(y_ref_value);
    ImplicitPredictorMap map;
    if (variant == "unconstrained") {
      map = implicit_unconstrained(fit_ls(data, tol), MatrixXd::Identity(ny, ny),
                                   y_ref, lambda);
    } else if (variant == "affine") {
      map = implicit_affine(fit_als(data, tol), MatrixXd::Identity(ny, ny), y_ref,
                            lambda);
    } else if (variant == "terminal") {
      const int p_step = ny / data.dims().N_f;
      ControlObjective obj = ControlObjective::tracking(
          MatrixXd::Identity(p_step, p_step), data.dims().N_f, y_ref,
          MatrixXd::Zero(data.u_rows(), data.u_rows()),
          VectorXd::Zero(data.u_rows()));
      auto [m, weights] =
          implicit_terminal(fit_ls(data, tol), obj, lambda, n_terminal);
      map = m;
      json wj;
      wj["Lambda_ref"] = io::matrix_to_json(weights.Lambda_ref);
      wj["Lambda_reg"] = io::matrix_to_json(weights.Lambda_reg);
      io::write_json(join(out_dir, "terminal_weights.json"), wj);
    } else {
      throw std::invalid_argument("unknown predictor variant: " + variant);
    }
    io::write_json(join(out_dir, "map.json"), io::map_to_json(map));

    if (!grid_spec.empty()) {
      if (data.w_rows() != 1 || data.u_rows() != 1) {
        throw std::invalid_argument("grid output needs scalar state and input");
      }
      auto [ax, au] = parse_grid(grid_spec);
      std::ofstream csv(join(out_dir, "surface.csv"), std::ios::binary);
      csv << "xi,u";
      for (int r = 0; r < ny; ++r) csv << ",yhat" << r;
      csv << "\n";
      for (int i = 0; i < ax.count; ++i) {
        for (int j = 0; j < au.count; ++j) {
          const VectorXd xi = VectorXd::Constant(1, ax.at(i));
          const VectorXd u = VectorXd::Constant(1, au.at(j));
          const VectorXd y = map.eval(xi, u);
          csv << io::format_g17(xi(0)) << ',' << io::format_g17(u(0));
          for (int r = 0; r < ny; ++r) csv << ',' << io::format_g17(y(r));
          csv << "\n";
        }
      }
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

namespace {

struct CampaignLog {
  std::vector<std::string> failures;
  int checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
};

std::vector<std::pair<std::string, Regularizer>> oracle_family(
    const DataMatrix& data, Rng& rng) {
  std::vector<std::pair<std::string, Regularizer>> family;
  family.emplace_back("quadratic", Regularizer::quadratic(3.7));
  family.emplace_back("projperp", Regularizer::projection_perp(1.4));
  family.emplace_back("projpar", Regularizer::projection_par(0.9));
  family.emplace_back("mixed", Regularizer::mixed(0.25, 50.0));
  VectorXd a_bar(data.cols());
  for (Eigen::Index i = 0; i < a_bar.size(); ++i) a_bar(i) = rng.gaussian();
  family.emplace_back("offset", Regularizer::offset(1.2, a_bar));
  family.emplace_back("gamma", Regularizer::gamma(0.6, 4.0));
  family.emplace_back("slack", Regularizer::slack(1.5, 4.5));
  Regularizer aq = Regularizer::quadratic(2.1);
  aq.affine = true;
  family.emplace_back("affine-quadratic", aq);
  Regularizer ap = Regularizer::projection_perp(1.1);
  ap.affine = true;
  family.emplace_back("affine-projperp", ap);
  return family;
}

void run_oracle_campaign(CampaignLog& log, const VerifyOptions& opts) {
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t seed = opts.seed * 1000 + static_cast<std::uint64_t>(i);
    auto inst = fixtures::random_instance(seed);
    LeastSquaresPredictor P = fit_ls(inst.data);
    AffineLeastSquaresPredictor Pa = fit_als(inst.data);
    if (opts.inject_fault == "qreg") {
      P.Q_reg *= 1.01;
    }
    Rng rng(seed ^ 0xabcdef);
    for (auto& [name, reg] : oracle_family(inst.data, rng)) {
      const double closed =
          reg.affine ? trajectory_cost(reg, Pa, inst.data, inst.w).total
                     : trajectory_cost(reg, P, inst.data, inst.w).total;
      const double oracle =
          brute_force_cost(reg, inst.data, inst.w, reg.affine).cost;
      log.expect(std::abs(closed - oracle) <= 1e-7 * (1.0 + std::abs(oracle)),
                 "oracle equivalence violated: variant=" + name +
                     " seed=" + std::to_string(seed));
    }
  }
}

void run_gamma_campaign(CampaignLog& log, const VerifyOptions& opts) {
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t seed = opts.seed * 2000 + static_cast<std::uint64_t>(i);
    auto inst = fixtures::random_instance(seed);
    LeastSquaresPredictor P = fit_ls(inst.data);
    GammaCoordinates g = gamma_from_trajectory(lq_decompose(inst.data), inst.w);
    const double r1 = weighted_sqnorm(inst.w.xi, P.WWt_inv);
    const double r2 = weighted_sqnorm(inst.w.u - P.predict_u(inst.w.xi), P.R_reg);
    const double r3 =
        weighted_sqnorm(inst.w.y - P.predict_y(inst.w.xi, inst.w.u), P.Q_reg);
    const std::string tag = " seed=" + std::to_string(seed);
    log.expect(std::abs(g.gamma1.squaredNorm() - r1) <= 1e-9 * (1.0 + r1),
               "gamma1 identity violated" + tag);
    log.expect(std::abs(g.gamma2.squaredNorm() - r2) <= 1e-9 * (1.0 + r2),
               "gamma2 identity violated" + tag);
    log.expect(std::abs(g.gamma3.squaredNorm() - r3) <= 1e-9 * (1.0 + r3),
               "gamma3 identity violated" + tag);
  }
}

void run_projection_campaign(CampaignLog& log, const VerifyOptions& opts) {
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t seed = opts.seed * 3000 + static_cast<std::uint64_t>(i);
    auto inst = fixtures::random_instance(seed);
    BruteForceResult bf =
        brute_force_cost(Regularizer::quadratic(1.0), inst.data, inst.w);
    ProjectorPair proj = projectors(inst.data.Z());
    const double whole = bf.a.squaredNorm();
    const double split =
        (proj.Pi * bf.a).squaredNorm() + (proj.Pi_perp * bf.a).squaredNorm();
    log.expect(std::abs(whole - split) <= 1e-10 * (1.0 + whole),
               "projection split violated seed=" + std::to_string(seed));
  }
}

void run_reduced_campaign(CampaignLog& log, const VerifyOptions& opts) {
  const std::vector<Regularizer> regs = {
      Regularizer::quadratic(2.0), Regularizer::projection_perp(6.0),
      Regularizer::mixed(0.2, 30.0), Regularizer::gamma(0.5, 8.0)};
  for (int i = 0; i < opts.instances; ++i) {
    const std::uint64_t seed = opts.seed * 4000 + static_cast<std::uint64_t>(i);
    const Regularizer& reg = regs[static_cast<std::size_t>(i) % regs.size()];
    DPCProblem prob = fixtures::random_problem(seed, reg);
    DPCSolution full = solve_full(prob);
    DPCSolution red = solve_reduced(prob);
    const std::string tag = " seed=" + std::to_string(seed);
    log.expect(full.status == SolveStatus::optimal, "full solve failed" + tag);
    log.expect(
        std::abs(full.value - red.value) <= 1e-8 * (1.0 + std::abs(full.value)),
        "full/reduced value mismatch" + tag);
    log.expect((full.u - red.u).norm() <= 1e-6 * (1.0 + full.u.norm()),
               "full/reduced minimizer mismatch" + tag);
  }
}

void run_definition2_campaign(CampaignLog& log, const VerifyOptions& opts) {
  const int count = std::max(3, opts.instances / 10);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = opts.seed * 5000 + static_cast<std::uint64_t>(i);
    DPCProblem prob = fixtures::random_problem(seed, Regularizer::quadratic(1.5));
    LeastSquaresPredictor P = fit_ls(prob.data);
    ImplicitPredictorMap map =
        implicit_unconstrained(P, prob.objective.Q, prob.objective.y_ref, 1.5);
    Rng rng(seed);
    std::vector<VectorXd> xis, us;
    for (int k = 0; k < 3; ++k) {
      VectorXd xi(P.xi_dim);
      for (int r = 0; r < P.xi_dim; ++r) xi(r) = rng.gaussian();
      xis.push_back(xi);
    }
    for (int k = 0; k < 2; ++k) {
      VectorXd u(P.u_dim);
      for (int r = 0; r < P.u_dim; ++r) u(r) = rng.gaussian();
      us.push_back(u);
    }
    Definition2Report rep = verify_definition2(map, prob, xis, us);
    log.expect(rep.passed, "definition-2 check failed seed=" + std::to_string(seed));
  }
}

void run_slack_campaign(CampaignLog& log, const VerifyOptions& opts) {
  const int count = std::max(3, opts.instances / 2);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = opts.seed * 6000 + static_cast<std::uint64_t>(i);
    DPCProblem prob = fixtures::random_problem(seed, Regularizer::slack(1.5, 4.0));
    DPCSolution explicit_sol = solve_full(prob);
    SlackAugmentation aug = slack_augment(prob.data, 1.5, 4.0);
    DPCProblem prob_aug{aug.data, prob.objective, prob.constraints,
                        Regularizer::quadratic(1.5), prob.xi};
    DPCSolution aug_sol = solve_full(prob_aug);
    const std::string tag = " seed=" + std::to_string(seed);
    log.expect(std::abs(explicit_sol.value - aug_sol.value) <=
                   1e-8 * (1.0 + std::abs(aug_sol.value)),
               "slack equivalence (value) violated" + tag);
    log.expect(
        (explicit_sol.u - aug_sol.u).norm() <= 1e-7 * (1.0 + aug_sol.u.norm()),
        "slack equivalence (input) violated" + tag);
  }
}

void run_feasibility_campaign(CampaignLog& log, const VerifyOptions& opts) {
  DPCProblem prob = fixtures::random_problem(opts.seed, Regularizer::quadratic(1.0));
  prob.constraints.u_box = Box{VectorXd::Constant(prob.data.u_rows(), -2.0),
                               VectorXd::Constant(prob.data.u_rows(), 2.0)};
  Rng rng(opts.seed);
  for (int i = 0; i < opts.instances; ++i) {
    VectorXd xi(prob.data.w_rows());
    for (int r = 0; r < xi.size(); ++r) xi(r) = rng.gaussian();
    prob.xi = xi;
    FeasibilityReport rep = feasible(prob);
    DPCSolution sol = solve_full(prob);
    log.expect(rep.feasible && sol.status == SolveStatus::optimal,
               "full-row-rank feasibility violated instance=" + std::to_string(i));
  }

  // converse: tall W, state off the image
  Dims dims;
  dims.mode = DataMode::statespace;
  dims.n = 3;
  dims.p = 3;
  MatrixXd W(3, 2), U(1, 2), Y(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) W(i, j) = rng.gaussian();
  for (int j = 0; j < 2; ++j) U(0, j) = rng.gaussian();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) Y(i, j) = rng.gaussian();
  DataMatrix data(W, U, Y, dims);
  Eigen::FullPivLU<MatrixXd> lu(W.transpose());
  ControlObjective obj;
  obj.Q = MatrixXd::Identity(3, 3);
  obj.y_ref = VectorXd::Zero(3);
  obj.R_u = MatrixXd::Identity(1, 1);
  obj.u_ref = VectorXd::Zero(1);
  DPCProblem bad{data, obj, ConstraintSet{}, Regularizer::quadratic(1.0),
                 VectorXd(lu.kernel().col(0))};
  FeasibilityReport rep = feasible(bad);
  log.expect(!rep.feasible && rep.xi_image_residual > 0.0,
             "rank-deficient infeasibility not detected");
}

}  // namespace

int cmd_verify(const VerifyOptions& opts) {
  static const std::vector<std::string> kAll = {
      "oracle", "gamma", "projection", "reduced", "definition2", "slack",
      "feasibility"};
  std::vector<std::string> campaigns = opts.campaigns;
  if (campaigns.size() == 1 && campaigns.front() == "all") campaigns = kAll;
  if (campaigns.empty()) {
    std::cerr << "error: empty campaign list; available:";
    for (const auto& c : kAll) std::cerr << ' ' << c;
    std::cerr << "\n";
    return kExitValidation;
  }
  CampaignLog log;
  try {
    for (const std::string& c : campaigns) {
      if (c == "oracle") run_oracle_campaign(log, opts);
      else if (c == "gamma") run_gamma_campaign(log, opts);
      else if (c == "projection") run_projection_campaign(log, opts);
      else if (c == "reduced") run_reduced_campaign(log, opts);
      else if (c == "definition2") run_definition2_campaign(log, opts);
      else if (c == "slack") run_slack_campaign(log, opts);
      else if (c == "feasibility") run_feasibility_campaign(log, opts);
      else {
        std::cerr << "error: unknown campaign " << c << "\n";
        return kExitValidation;
      }
      std::cout << "campaign " << c << ": done\n";
    }
  } catch (const std::exception& e) {
    log.failures.push_back(std::string("campaign aborted: ") + e.what());
  }

  json report;
  report["checks"] = log.checks;
  report["failures"] = log.failures;
  report["seed"] = opts.seed;
  report["instances"] = opts.instances;
  if (!opts.out_file.empty()) io::write_json(opts.out_file, report);

  if (log.failures.empty()) {
    std::cout << "verify: " << log.checks << " checks passed\n";
    return kExitOk;
  }
  for (const auto& f : log.failures) std::cerr << "FAIL: " << f << "\n";
  std::cerr << "verify: " << log.failures.size() << " of " << log.checks
            << " checks failed\n";
  return kExitVerification;
}

int cmd_example_fig2(const std::string& out_dir, std::uint64_t seed, int samples) {
  try {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    ensure_dir(out_dir);
    DataMatrix clean = fixtures::example_cloud_data(samples, 0.0, seed);
    write_data_bundle(out_dir, "cloud_noiseless", clean, kDefaultRankTol);
    DataMatrix noisy = fixtures::example_cloud_data(samples, 0.1, seed);
    write_data_bundle(out_dir, "cloud_noisy", noisy, kDefaultRankTol);
    RankReport r0 = rank_report(clean, 1);
    RankReport r1 = rank_report(noisy, 1);
    std::cout << "noiseless: rank_D=" << r0.rank_D << " rank_Z=" << r0.rank_Z
              << " rank_deficiency=" << (r0.rank_deficiency_holds ? "yes" : "no")
              << "\n";
    std::cout << "noisy:     rank_D=" << r1.rank_D << " rank_Z=" << r1.rank_Z
              << " full_row_rank=" << (r1.full_row_rank_D ? "yes" : "no") << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int cmd_example_fig3(const std::string& out_dir, double lambda) {
  try {
    ensure_dir(out_dir);
    DataMatrix data = fixtures::example_hankel_short();
    write_data_bundle(out_dir, "data", data, kDefaultRankTol);
    LeastSquaresPredictor P = fit_ls(data);
    const MatrixXd Q = MatrixXd::Identity(1, 1);
    const VectorXd y_ref = VectorXd::Zero(1);
    ImplicitPredictorMap map = implicit_unconstrained(P, Q, y_ref, lambda);
    io::write_json(join(out_dir, "map.json"), io::map_to_json(map));

    // predictor and least-squares surfaces on a grid
    std::ofstream surf(join(out_dir, "surface.csv"), std::ios::binary);
    surf << "x0,u,y_dpc,y_ls\n";
    for (int i = 0; i <= 30; ++i) {
      for (int j = 0; j <= 30; ++j) {
        const double x0 = -1.5 + 3.0 * i / 30.0;
        const double u = -1.5 + 3.0 * j / 30.0;
        const VectorXd xi = VectorXd::Constant(1, x0);
        const VectorXd uu = VectorXd::Constant(1, u);
        surf << io::format_g17(x0) << ',' << io::format_g17(u) << ','
             << io::format_g17(map.eval(xi, uu)(0)) << ','
             << io::format_g17(P.predict_y(xi, uu)(0)) << "\n";
      }
    }

    // parametric optimal solutions for both regularizers on a state grid
    ControlObjective obj;
    obj.Q = Q;
    obj.y_ref = y_ref;
    obj.R_u = MatrixXd::Identity(1, 1);
    obj.u_ref = VectorXd::Zero(1);
    for (const std::string kind : {"quadratic", "projperp"}) {
      Regularizer reg = kind == "quadratic" ? Regularizer::quadratic(lambda)
                                            : Regularizer::projection_perp(lambda);
      std::ofstream csv(join(out_dir, "solutions_" + kind + ".csv"),
                        std::ios::binary);
      csv << "x0,u_star,y_star,value,on_map_residual\n";
      for (int i = 0; i <= 40; ++i) {
        const double x0 = -1.0 + 2.0 * i / 40.0;
        DPCProblem prob{data, obj, ConstraintSet{}, reg, VectorXd::Constant(1, x0)};
        DPCSolution sol = solve_full(prob);
        const double on_map =
            (sol.y - map.eval(prob.xi, sol.u)).cwiseAbs().maxCoeff();
        csv << io::format_g17(x0) << ',' << io::format_g17(sol.u(0)) << ','
            << io::format_g17(sol.y(0)) << ',' << io::format_g17(sol.value) << ','
            << io::format_g17(on_map) << "\n";
      }
    }
    std::cout << "wrote surface.csv and parametric solutions (lambda=" << lambda
              << ")\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int cmd_example_fig4(const std::string& out_dir, double lambda) {
  try {
    ensure_dir(out_dir);
    DataMatrix data = fixtures::example_hankel_long();
    write_data_bundle(out_dir, "data", data, kDefaultRankTol);
    LeastSquaresPredictor P = fit_ls(data);
    VectorXd y_ref(2);
    y_ref << 0.5, 0.5;
    // input cost fixed to zero here; the predictor map does not depend on it
    ControlObjective obj = ControlObjective::tracking(
        MatrixXd::Identity(1, 1), 2, y_ref, MatrixXd::Zero(2, 2), VectorXd::Zero(2));
    auto [map, weights] = implicit_terminal(P, obj, lambda, 1);
    io::write_json(join(out_dir, "map.json"), io::map_to_json(map));
    json wj;
    wj["Lambda_ref"] = io::matrix_to_json(weights.Lambda_ref);
    wj["Lambda_reg"] = io::matrix_to_json(weights.Lambda_reg);
    io::write_json(join(out_dir, "terminal_weights.json"), wj);

    // two prediction-step surfaces over (x0, u1) with the second input fixed
    std::ofstream surf(join(out_dir, "surface.csv"), std::ios::binary);
    surf << "x0,u1,yhat1,yhat2\n";
    for (int i = 0; i <= 30; ++i) {
      for (int j = 0; j <= 30; ++j) {
        const double x0 = -1.5 + 3.0 * i / 30.0;
        const double u1 = -1.5 + 3.0 * j / 30.0;
        VectorXd u(2);
        u << u1, 0.0;
        const VectorXd y = map.eval(VectorXd::Constant(1, x0), u);
        surf << io::format_g17(x0) << ',' << io::format_g17(u1) << ','
             << io::format_g17(y(0)) << ',' << io::format_g17(y(1)) << "\n";
      }
    }
    std::cout << "wrote surface.csv (second step pinned at "
              << io::format_g17(y_ref(1)) << ")\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return fail_validation(e);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"regularized data-driven predictive control toolkit"};
  app.require_subcommand(1);

  double tol = kDefaultRankTol;
  app.add_option("--tol", tol, "relative rank/SVD tolerance")->capture_default_str();

  std::string config, out, data_csv, descriptor;
  std::uint64_t seed = 1;

  auto* gen = app.add_subcommand("gen-data", "simulate a system and write trajectory data");
  gen->add_option("--config", config, "config JSON")->required();
  gen->add_option("--out", out, "output directory")->required();
  auto* seed_opt = gen->add_option("--seed", seed, "seed override");

  auto* fit = app.add_subcommand("fit", "fit least-squares predictors and weights");
  fit->add_option("--data", data_csv, "data CSV")->required();
  fit->add_option("--desc", descriptor, "data descriptor JSON")->required();
  fit->add_option("--out", out, "output directory")->required();

  std::string reg_spec, w_value;
  auto* cost = app.add_subcommand("cost", "trajectory-specific regularization cost");
  cost->add_option("--data", data_csv)->required();
  cost->add_option("--desc", descriptor)->required();
  cost->add_option("--reg", reg_spec, "regularizer spec, e.g. quadratic:lambda=10")
      ->required();
  cost->add_option("--w", w_value, "trajectory (xi,u,y): @file.csv or [v;v;...]")
      ->required();
  cost->add_option("--out", out, "output JSON file");

  std::string problem_path;
  bool reduced = false;
  auto* solve = app.add_subcommand("solve", "solve a DPC problem document");
  solve->add_option("--config", problem_path, "problem JSON")->required();
  solve->add_option("--out", out, "solution JSON file");
  solve->add_flag("--reduced", reduced, "solve the reduced (u, y) problem");

  std::string variant = "unconstrained", y_ref_value, grid_spec;
  double lambda = 1.0;
  int n_terminal = 1;
  auto* pred = app.add_subcommand("predictor", "build an implicit predictor map");
  pred->add_option("--data", data_csv)->required();
  pred->add_option("--desc", descriptor)->required();
  pred->add_option("--variant", variant, "unconstrained|affine|terminal");
  pred->add_option("--lambda", lambda, "regularization weight");
  pred->add_option("--yref", y_ref_value, "reference: @file or [v;...]");
  pred->add_option("--n-terminal", n_terminal, "pinned terminal steps");
  pred->add_option("--grid", grid_spec, "surface grid lo:hi:n,lo:hi:n");
  pred->add_option("--out", out, "output directory")->required();

  VerifyOptions vopts;
  std::string campaigns_arg = "all";
  auto* verify = app.add_subcommand("verify", "run the verification campaigns");
  verify->add_option("--campaigns", campaigns_arg, "comma list or 'all'");
  verify->add_option("--instances", vopts.instances, "instances per campaign");
  verify->add_option("--seed", vopts.seed, "campaign seed");
  verify->add_option("--out", vopts.out_file, "report JSON file");
  verify->add_option("--inject-fault", vopts.inject_fault,
                     "corrupt an internal quantity (testing aid)");

  int samples = 500;
  auto* fig2 = app.add_subcommand("example-fig2",
                                  "regenerate the bundled data-cloud example");
  fig2->add_option("--out", out, "output directory")->required();
  fig2->add_option("--seed", seed, "sample seed");
  fig2->add_option("--samples", samples, "number of samples");

  auto* fig3 = app.add_subcommand("example-fig3",
                                  "one-step predictor surfaces and solutions");
  fig3->add_option("--out", out, "output directory")->required();
  fig3->add_option("--lambda", lambda, "regularization weight");

  auto* fig4 = app.add_subcommand("example-fig4",
                                  "terminal-constrained two-step surfaces");
  fig4->add_option("--out", out, "output directory")->required();
  fig4->add_option("--lambda", lambda, "regularization weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  if (gen->parsed()) return cmd_gen_data(config, out, seed, seed_opt->count() > 0, tol);
  if (fit->parsed()) return cmd_fit(data_csv, descriptor, out, tol);
  if (cost->parsed()) return cmd_cost(data_csv, descriptor, reg_spec, w_value, out, tol);
  if (solve->parsed()) return cmd_solve(problem_path, out, reduced);
  if (pred->parsed()) {
    return cmd_predictor(data_csv, descriptor, variant, lambda, y_ref_value,
                         n_terminal, grid_spec, out, tol);
  }
  if (verify->parsed()) {
    vopts.campaigns.clear();
    std::stringstream ss(campaigns_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) vopts.campaigns.push_back(item);
    }
    return cmd_verify(vopts);
  }
  if (fig2->parsed()) return cmd_example_fig2(out, seed, samples);
  if (fig3->parsed()) return cmd_example_fig3(out, lambda);
  if (fig4->parsed()) return cmd_example_fig4(out, lambda);
  return kExitValidation;
}

}  // namespace ddpc::cli
