#ifndef DDPC_CLI_COMMANDS_HPP
#define DDPC_CLI_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

// Command implementations behind the CLI front end. Each returns the process
// exit code: 0 success, 1 validation error, 2 infeasible problem,
// 3 verification failure.
namespace ddpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitVerification = 3;

int cmd_gen_data(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed_override, bool has_seed_override, double tol);

int cmd_fit(const std::string& data_csv, const std::string& descriptor,
            const std::string& out_dir, double tol);

int cmd_cost(const std::string& data_csv, const std::string& descriptor,
             const std::string& reg_spec, const std::string& w_value,
             const std::string& out_file, double tol);

int cmd_solve(const std::string& problem_path, const std::string& out_file,
              bool reduced);

int cmd_predictor(const std::string& data_csv, const std::string& descriptor,
                  const std::string& variant, double lambda,
                  const std::string& y_ref_value, int n_terminal,
                  const std::string& grid_spec, const std::string& out_dir,
                  double tol);

struct VerifyOptions {
  std::vector<std::string> campaigns;  // empty list is an error
  int instances = 100;
  std::uint64_t seed = 1;
  std::string out_file;
  std::string inject_fault;  // e.g. "qreg" flips a weight to force a failure
};

int cmd_verify(const VerifyOptions& opts);

int cmd_example_fig2(const std::string& out_dir, std::uint64_t seed, int samples);
int cmd_example_fig3(const std::string& out_dir, double lambda);
int cmd_example_fig4(const std::string& out_dir, double lambda);

int run(int argc, char** argv);

}  // namespace ddpc::cli

#endif
