#pragma once

#include <vector>

#include "goddard/model.hpp"

#include <Eigen/Dense>

namespace goddard::direct {

using Eigen::VectorXd;

struct InfeasibleStagnation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MaxIterations : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DirectOptions {
  int max_outer = 60;
  int max_inner = 800;
  double rho0 = 100.0;         // initial constraint penalty
  double rho_growth = 5.0;
  double constraint_tol = 1e-6;
  double step_tol = 1e-9;      // projected-gradient stationarity
  double u_eps = 1e-4;         // smoothing of |u| in cost and mass flow
  double t_f_init = 0.25;
  double t_f_min = 0.05;
  double t_f_max = 1.0;
  int seeds = 3;               // multi-start attempts
  unsigned rng_seed = 0;
};

/// Converged transcription result. objective follows the same convention
/// as the indirect solver: consumed mass b * integral |u| dt.
struct DirectSolution {
  double t_f = 0.0;
  double t_off = 0.0;          // on-off solves only
  double objective = 0.0;
  double final_mass = 0.0;
  double constraint_norm = 0.0;
  std::vector<double> t_grid;  // N+1 node times
  std::vector<Vec3> u;         // N node controls (piecewise constant)
  std::vector<RocketState> x;  // N+1 node states
  int outer_iterations = 0;
  int inner_iterations = 0;
  int seed_used = 0;
};

/// Piecewise-constant transcription with N nodes, propagated by fixed-step
/// RK4 (step t_f / N); the terminal position constraint is handled by an
/// augmented-Lagrangian outer loop, the thrust ball |u_i| <= 1 by radial
/// projection inside a spectral projected-gradient inner loop with an
/// exact discrete-adjoint gradient.
DirectSolution solve_direct(int N, const ModelParams& prm,
                            const BoundaryConditions& bc,
                            const DirectOptions& opts = {});

/// Full-thrust-then-coast comparator: unknowns are t_f, the cutoff t_off
/// and M unit thrust directions on the burn; same outer method, gradient
/// by finite differences, directions renormalized after every step.
DirectSolution solve_onoff(const ModelParams& prm, const BoundaryConditions& bc,
                           const DirectOptions& opts = {}, int M = 20);

/// Sampled control-norm history of one solve, for cross-method comparison.
struct ControlProfile {
  std::vector<double> t;
  std::vector<double> u_norm;
  double t_f = 0.0;
  double objective = 0.0;
};

ControlProfile profile_from_direct(const DirectSolution& s);

struct ComparisonReport {
  double obj_direct_minus_indirect = 0.0;
  double obj_onoff_minus_indirect = 0.0;
  double tf_direct_minus_indirect = 0.0;
  double tf_onoff_minus_indirect = 0.0;
  double supnorm_direct_indirect = 0.0;  // control-norm profiles, common grid
  double supnorm_onoff_indirect = 0.0;
  int grid_points = 0;
};

/// Resamples all control-norm profiles on a common uniform grid and
/// reports objective / final-time deltas and sup-norm profile distances.
ComparisonReport compare(const ControlProfile& indirect,
                         const ControlProfile& direct_sol,
                         const ControlProfile& onoff, int grid_points = 200);

/// Three-phase shape test of a control-norm profile: a leading plateau
/// near full thrust, an interior plateau strictly inside (0.1, 0.9)
/// covering at least 20% of the horizon, and a trailing plateau near zero.
bool check_three_phase(const ControlProfile& p);

}  // namespace goddard::direct
