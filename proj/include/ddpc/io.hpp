#ifndef DDPC_IO_HPP
#define DDPC_IO_HPP

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "ddpc/implicit_predictor.hpp"
#include "ddpc/ocp_solver.hpp"
#include "ddpc/predictors.hpp"
#include "ddpc/regularizers.hpp"
#include "ddpc/trajectory_data.hpp"

// File formats:
//  - data CSV: header "role,block,row,c0,...", one line per matrix row, roles
//    w/u/y, 17 significant digits, LF line endings; a JSON descriptor carries
//    dims and mode alongside.
//  - predictors, solutions, maps, reports: JSON with row-major matrices.
namespace ddpc::io {

std::string format_g17(double v);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

// plain CSV (comma-separated rows) without header
Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& M);

// matrix/vector field of a problem document: inline JSON or "@file.csv"
Eigen::MatrixXd matrix_from_doc(const nlohmann::json& j, const std::string& base_dir);
Eigen::VectorXd vector_from_doc(const nlohmann::json& j, const std::string& base_dir);

nlohmann::json dims_to_json(const Dims& dims);
Dims dims_from_json(const nlohmann::json& j);

void write_data_csv(const std::string& path, const DataMatrix& data);
void write_data_descriptor(const std::string& path, const DataMatrix& data);
DataMatrix read_data(const std::string& csv_path, const std::string& descriptor_path);

nlohmann::json rank_report_to_json(const RankReport& rep);

nlohmann::json predictor_to_json(const LeastSquaresPredictor& P);
LeastSquaresPredictor predictor_from_json(const nlohmann::json& j);
nlohmann::json affine_predictor_to_json(const AffineLeastSquaresPredictor& P);

nlohmann::json breakdown_to_json(const TrajectoryCostBreakdown& b);

nlohmann::json solution_to_json(const DPCSolution& sol);

nlohmann::json map_to_json(const ImplicitPredictorMap& map);
ImplicitPredictorMap map_from_json(const nlohmann::json& j);

nlohmann::json feasibility_to_json(const FeasibilityReport& rep);

// Problem document: references the data CSV/descriptor (paths relative to the
// document), objective matrices inline, constraint spec, regularizer string.
DPCProblem problem_from_json(const nlohmann::json& doc, const std::string& base_dir);
DPCProblem problem_from_file(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace ddpc::io

#endif
