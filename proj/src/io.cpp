#include "ddpc/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace ddpc::io {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json matrix_to_json(const MatrixXd& M) {
  json j;
  j["rows"] = M.rows();
  j["cols"] = M.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
  }
  j["data"] = data;  // row-major
  return j;
}

MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  }
  MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      M(i, k) = data[static_cast<std::size_t>(i * cols + k)];
    }
  }
  return M;
}

json vector_to_json(const VectorXd& v) {
  std::vector<double> data(v.data(), v.data() + v.size());
  return json(data);
}

VectorXd vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) row.push_back(std::stod(item));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("empty csv matrix: " + path);
  MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw std::invalid_argument("ragged csv matrix: " + path);
    }
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return M;
}

void write_csv_matrix(const std::string& path, const MatrixXd& M) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_g17(M(i, c));
    }
    out << "\n";
  }
}

namespace {

std::string resolve_path(const std::string& p, const std::string& base_dir) {
  std::filesystem::path path(p);
  if (path.is_absolute()) return path.string();
  return (std::filesystem::path(base_dir) / path).string();
}

}  // namespace

MatrixXd matrix_from_doc(const json& j, const std::string& base_dir) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (!s.empty() && s.front() == '@') {
      return read_csv_matrix(resolve_path(s.substr(1), base_dir));
    }
    throw std::invalid_argument("matrix field must be inline JSON or @file.csv");
  }
  return matrix_from_json(j);
}

VectorXd vector_from_doc(const json& j, const std::string& base_dir) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (!s.empty() && s.front() == '@') {
      MatrixXd M = read_csv_matrix(resolve_path(s.substr(1), base_dir));
      if (M.cols() == 1) return M.col(0);
      if (M.rows() == 1) return M.row(0).transpose();
      throw std::invalid_argument("vector csv must be a single row or column");
    }
    throw std::invalid_argument("vector field must be inline JSON or @file.csv");
  }
  return vector_from_json(j);
}

json dims_to_json(const Dims& dims) {
  json j;
  j["m"] = dims.m;
  j["p"] = dims.p;
  if (dims.n) j["n"] = *dims.n;
  j["N_p"] = dims.N_p;
  j["N_f"] = dims.N_f;
  j["ell"] = dims.ell;
  j["mode"] = to_string(dims.mode);
  if (dims.lag_hint) j["lag_hint"] = *dims.lag_hint;
  return j;
}

Dims dims_from_json(const json& j) {
  Dims dims;
  dims.m = j.at("m").get<int>();
  dims.p = j.at("p").get<int>();
  if (j.contains("n") && !j["n"].is_null()) dims.n = j["n"].get<int>();
  dims.N_p = j.at("N_p").get<int>();
  dims.N_f = j.at("N_f").get<int>();
  dims.ell = j.at("ell").get<long>();
  dims.mode = data_mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("lag_hint") && !j["lag_hint"].is_null()) {
    dims.lag_hint = j["lag_hint"].get<int>();
  }
  return dims;
}

namespace {

struct RowLabel {
  std::string role;
  int block;
  int row;
};

// block = ordinal sub-block within the role's stacking, row = row within it
std::vector<RowLabel> row_labels(const DataMatrix& data) {
  const Dims& d = data.dims();
  std::vector<RowLabel> labels;
  labels.reserve(static_cast<std::size_t>(data.total_rows()));
  if (d.mode == DataMode::io) {
    for (int b = 0; b < d.N_p; ++b)
      for (int r = 0; r < d.m; ++r) labels.push_back({"w", b, r});
    for (int b = 0; b < d.N_p; ++b)
      for (int r = 0; r < d.p; ++r) labels.push_back({"w", d.N_p + b, r});
  } else {
    for (int r = 0; r < data.w_rows(); ++r) labels.push_back({"w", 0, r});
  }
  for (int b = 0; b < d.N_f; ++b)
    for (int r = 0; r < d.m; ++r) labels.push_back({"u", b, r});
  const int y_step = data.y_rows() / d.N_f;
  for (int b = 0; b < d.N_f; ++b)
    for (int r = 0; r < y_step; ++r) labels.push_back({"y", b, r});
  return labels;
}

}  // namespace

void write_data_csv(const std::string& path, const DataMatrix& data) {
  if (data.ones_augmented()) {
    throw std::invalid_argument("write_data_csv: augmented matrices are not persisted");
  }
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "role,block,row";
  for (long c = 0; c < data.cols(); ++c) out << ",c" << c;
  out << "\n";
  const MatrixXd D = data.D();
  const auto labels = row_labels(data);
  for (int i = 0; i < data.total_rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)].role << ','
        << labels[static_cast<std::size_t>(i)].block << ','
        << labels[static_cast<std::size_t>(i)].row;
    for (long c = 0; c < data.cols(); ++c) out << ',' << format_g17(D(i, c));
    out << "\n";
  }
}

void write_data_descriptor(const std::string& path, const DataMatrix& data) {
  write_json(path, dims_to_json(data.dims()));
}

DataMatrix read_data(const std::string& csv_path, const std::string& descriptor_path) {
  Dims dims = dims_from_json(read_json(descriptor_path));
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty data csv: " + csv_path);

  std::vector<std::vector<double>> w_rows, u_rows, y_rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::getline(ss, item, ',');
    const std::string role = item;
    std::getline(ss, item, ',');  // block
    std::getline(ss, item, ',');  // row
    std::vector<double> vals;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (role == "w") w_rows.push_back(std::move(vals));
    else if (role == "u") u_rows.push_back(std::move(vals));
    else if (role == "y") y_rows.push_back(std::move(vals));
    else throw std::invalid_argument("read_data: unknown role " + role);
  }
  auto to_matrix = [](const std::vector<std::vector<double>>& rows) {
    MatrixXd M(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) {
        throw std::invalid_argument("read_data: ragged csv");
      }
      for (std::size_t c = 0; c < rows[i].size(); ++c) {
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
      }
    }
    return M;
  };
  DataMatrix data(to_matrix(w_rows), to_matrix(u_rows), to_matrix(y_rows), dims);
  if (data.cols() != dims.ell) {
    throw std::invalid_argument("read_data: column count disagrees with descriptor");
  }
  return data;
}

json rank_report_to_json(const RankReport& rep) {
  json j;
  j["rank_D"] = rep.rank_D;
  j["rank_Z"] = rep.rank_Z;
  j["rank_W"] = rep.rank_W;
  j["gpe_satisfied"] = rep.gpe_satisfied;
  j["full_row_rank_D"] = rep.full_row_rank_D;
  j["rank_deficiency_holds"] = rep.rank_deficiency_holds;
  j["tolerance"] = rep.tolerance;
  if (rep.gpe_target_io) j["gpe_target_io"] = *rep.gpe_target_io;
  if (rep.gpe_target_statespace) j["gpe_target_statespace"] = *rep.gpe_target_statespace;
  j["affine"] = rep.affine;
  return j;
}

json predictor_to_json(const LeastSquaresPredictor& P) {
  json j;
  j["G_LS"] = matrix_to_json(P.G_LS);
  j["K_LS"] = matrix_to_json(P.K_LS);
  j["E_y"] = matrix_to_json(P.E_y);
  j["E_u"] = matrix_to_json(P.E_u);
  j["Q_reg"] = matrix_to_json(P.Q_reg);
  j["R_reg"] = matrix_to_json(P.R_reg);
  j["WWt_inv"] = matrix_to_json(P.WWt_inv);
  j["gram_y"] = matrix_to_json(P.gram_y);
  j["gram_u"] = matrix_to_json(P.gram_u);
  j["gram_w"] = matrix_to_json(P.gram_w);
  j["explored_output_basis"] = matrix_to_json(P.explored_output_basis);
  j["q_reg_full_rank"] = P.q_reg_full_rank;
  j["r_reg_full_rank"] = P.r_reg_full_rank;
  j["w_full_row_rank"] = P.w_full_row_rank;
  j["xi_dim"] = P.xi_dim;
  j["u_dim"] = P.u_dim;
  j["y_dim"] = P.y_dim;
  j["tolerance"] = P.tolerance;
  return j;
}

LeastSquaresPredictor predictor_from_json(const json& j) {
  LeastSquaresPredictor P;
  P.G_LS = matrix_from_json(j.at("G_LS"));
  P.K_LS = matrix_from_json(j.at("K_LS"));
  P.E_y = matrix_from_json(j.at("E_y"));
  P.E_u = matrix_from_json(j.at("E_u"));
  P.Q_reg = matrix_from_json(j.at("Q_reg"));
  P.R_reg = matrix_from_json(j.at("R_reg"));
  P.WWt_inv = matrix_from_json(j.at("WWt_inv"));
  P.gram_y = matrix_from_json(j.at("gram_y"));
  P.gram_u = matrix_from_json(j.at("gram_u"));
  P.gram_w = matrix_from_json(j.at("gram_w"));
  P.explored_output_basis = matrix_from_json(j.at("explored_output_basis"));
  P.q_reg_full_rank = j.at("q_reg_full_rank").get<bool>();
  P.r_reg_full_rank = j.at("r_reg_full_rank").get<bool>();
  P.w_full_row_rank = j.at("w_full_row_rank").get<bool>();
  P.xi_dim = j.at("xi_dim").get<int>();
  P.u_dim = j.at("u_dim").get<int>();
  P.y_dim = j.at("y_dim").get<int>();
  P.tolerance = j.at("tolerance").get<double>();
  return P;
}

json affine_predictor_to_json(const AffineLeastSquaresPredictor& P) {
  json j;
  j["checked"] = predictor_to_json(P.checked);
  j["G_ALS"] = matrix_to_json(P.G_ALS);
  j["g_ALS"] = vector_to_json(P.g_ALS);
  j["K_ALS"] = matrix_to_json(P.K_ALS);
  j["k_ALS"] = vector_to_json(P.k_ALS);
  j["xi_dim"] = P.xi_dim;
  j["u_dim"] = P.u_dim;
  j["y_dim"] = P.y_dim;
  return j;
}

json breakdown_to_json(const TrajectoryCostBreakdown& b) {
  json j;
  j["total"] = b.total;
  j["term_y"] = b.term_y;
  j["term_u"] = b.term_u;
  j["term_xi"] = b.term_xi;
  j["weight_y"] = b.weight_y;
  j["weight_u"] = b.weight_u;
  j["weight_xi"] = b.weight_xi;
  j["term_y_active"] = b.term_y_active;
  j["term_u_active"] = b.term_u_active;
  j["term_xi_active"] = b.term_xi_active;
  j["closed_form"] = b.closed_form;
  j["gamma3_constrained"] = b.gamma3_constrained;
  j["gamma3_residual"] = b.gamma3_residual;
  return j;
}

json solution_to_json(const DPCSolution& sol) {
  json j;
  j["status"] = to_string(sol.status);
  j["u"] = vector_to_json(sol.u);
  j["y"] = vector_to_json(sol.y);
  j["a"] = vector_to_json(sol.a);
  j["sigma"] = vector_to_json(sol.sigma);
  if (sol.status == SolveStatus::optimal) j["value"] = sol.value;
  j["active_set"] = sol.active_set;
  j["non_unique"] = sol.non_unique;
  j["infeasibility_residual"] = sol.infeasibility_residual;
  j["diagnostics"] = {{"stationarity", sol.diagnostics.stationarity},
                      {"feasibility", sol.diagnostics.feasibility},
                      {"complementarity", sol.diagnostics.complementarity},
                      {"active_set_iterations", sol.diagnostics.active_set_iterations}};
  return j;
}

json map_to_json(const ImplicitPredictorMap& map) {
  json j;
  j["variant"] = to_string(map.variant);
  j["M_xi"] = matrix_to_json(map.M_xi);
  j["M_u"] = matrix_to_json(map.M_u);
  j["c"] = vector_to_json(map.c);
  j["lambda"] = map.lambda;
  j["Q"] = matrix_to_json(map.Q);
  j["y_ref"] = vector_to_json(map.y_ref);
  j["n_terminal_rows"] = map.n_terminal_rows;
  j["soft_limit_fallback"] = map.soft_limit_fallback;
  return j;
}

ImplicitPredictorMap map_from_json(const json& j) {
  ImplicitPredictorMap map;
  const std::string v = j.at("variant").get<std::string>();
  if (v == "unconstrained") map.variant = PredictorVariant::unconstrained;
  else if (v == "affine") map.variant = PredictorVariant::affine;
  else if (v == "offset") map.variant = PredictorVariant::offset;
  else if (v == "terminal") map.variant = PredictorVariant::terminal;
  else throw std::invalid_argument("map_from_json: unknown variant " + v);
  map.M_xi = matrix_from_json(j.at("M_xi"));
  map.M_u = matrix_from_json(j.at("M_u"));
  map.c = vector_from_json(j.at("c"));
  map.lambda = j.at("lambda").get<double>();
  map.Q = matrix_from_json(j.at("Q"));
  map.y_ref = vector_from_json(j.at("y_ref"));
  map.n_terminal_rows = j.at("n_terminal_rows").get<int>();
  map.soft_limit_fallback = j.at("soft_limit_fallback").get<bool>();
  return map;
}

json feasibility_to_json(const FeasibilityReport& rep) {
  json j;
  j["feasible"] = rep.feasible;
  j["boxes_nonempty"] = rep.boxes_nonempty;
  j["terminal_consistent"] = rep.terminal_consistent;
  j["xi_set_checked"] = rep.xi_set_checked;
  j["xi_in_state_set"] = rep.xi_in_state_set;
  j["full_row_rank"] = rep.full_row_rank;
  j["checked_xi_image"] = rep.checked_xi_image;
  j["xi_image_residual"] = rep.xi_image_residual;
  j["reason"] = rep.reason;
  return j;
}

DPCProblem problem_from_json(const json& doc, const std::string& base_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&base_dir](const std::string& p) {
    fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (fs::path(base_dir) / path).string();
  };
  DataMatrix data = read_data(resolve(doc.at("data_csv").get<std::string>()),
                              resolve(doc.at("data_descriptor").get<std::string>()));

  const json& obj = doc.at("objective");
  ControlObjective objective;
  if (obj.contains("Q_step")) {
    objective = ControlObjective::tracking(
        matrix_from_doc(obj.at("Q_step"), base_dir), data.dims().N_f,
        vector_from_doc(obj.at("y_ref"), base_dir),
        matrix_from_doc(obj.at("R_u"), base_dir),
        vector_from_doc(obj.at("u_ref"), base_dir));
  } else {
    objective.Q = matrix_from_doc(obj.at("Q"), base_dir);
    objective.y_ref = vector_from_doc(obj.at("y_ref"), base_dir);
    objective.R_u = matrix_from_doc(obj.at("R_u"), base_dir);
    objective.u_ref = vector_from_doc(obj.at("u_ref"), base_dir);
  }

  ConstraintSet cons;
  if (doc.contains("constraints")) {
    const json& c = doc["constraints"];
    if (c.contains("u_box")) {
      cons.u_box = Box{vector_from_json(c["u_box"].at("lo")),
                       vector_from_json(c["u_box"].at("hi"))};
    }
    if (c.contains("y_box")) {
      cons.y_box = Box{vector_from_json(c["y_box"].at("lo")),
                       vector_from_json(c["y_box"].at("hi"))};
    }
    if (c.contains("terminal")) {
      const json& t = c["terminal"];
      if (t.contains("steps")) {
        const int block = data.y_rows() / data.dims().N_f;
        cons.terminal = TerminalEquality::last_steps(
            t.at("steps").get<int>(), block, data.y_rows(), objective.y_ref);
      } else {
        cons.terminal = TerminalEquality{matrix_from_json(t.at("selector")),
                                         vector_from_json(t.at("target"))};
      }
    }
    if (c.contains("xi_set")) {
      cons.xi_set = Polyhedron{matrix_from_json(c["xi_set"].at("A")),
                               vector_from_json(c["xi_set"].at("b"))};
    }
  }

  DPCProblem prob{std::move(data), std::move(objective), std::move(cons),
                  Regularizer::parse(doc.at("regularizer").get<std::string>()),
                  vector_from_json(doc.at("xi"))};
  if (doc.contains("tolerance")) prob.tolerance = doc["tolerance"].get<double>();
  prob.validate();
  return prob;
}

DPCProblem problem_from_file(const std::string& path) {
  return problem_from_json(read_json(path),
                           std::filesystem::path(path).parent_path().string());
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace ddpc::io
