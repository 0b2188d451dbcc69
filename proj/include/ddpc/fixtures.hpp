#ifndef DDPC_FIXTURES_HPP
#define DDPC_FIXTURES_HPP

#include <cstdint>
#include <vector>

#include "ddpc/ocp_solver.hpp"
#include "ddpc/trajectory_data.hpp"

// Bundled example system and randomized instance generators shared by the
// CLI examples, the verification campaigns, and the test suites.
namespace ddpc::fixtures {

// scalar system (A, B) = (2, -0.5), treated in statespace mode
SystemModel example_system(double noise_std = 0.0);

// i.i.d. one-step samples x0, u ~ U[-1,1]; columns (x0, u, x1)
std::vector<TrajectoryTuple> example_cloud(int n_samples, double noise_std,
                                           std::uint64_t seed);
Dims example_cloud_dims();
DataMatrix example_cloud_data(int n_samples, double noise_std, std::uint64_t seed);

// recorded input-state sequences; Hankel data for horizons 1 and 2
DataMatrix example_hankel_short();  // N_f = 1, 3 x 4
DataMatrix example_hankel_long();   // N_f = 2, 5 x 5

struct RandomInstance {
  DataMatrix data;
  TrajectoryTuple w;
  std::uint64_t seed;
};

// Random full-row-rank data matrix (rows <= 10, ell <= 60) with a trajectory
// tuple; everything reachable by construction.
RandomInstance random_instance(std::uint64_t seed);

// Strictly convex tracking problem (Q, R_u positive definite) on a random
// instance; no box constraints.
DPCProblem random_problem(std::uint64_t seed, const Regularizer& reg);

}  // namespace ddpc::fixtures

#endif
