#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "goddard/extremal.hpp"
#include "goddard/odeint.hpp"

namespace goddard {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct IntegrationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructureViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularJacobian : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MaxIterationsExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LineSearchFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidUnknowns : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Placement of the switching conditions of a singular arc: the default
/// imposes psi = psi_dot = 0 at the arc start; the alternative imposes
/// psi = 0 at both extremities.
enum class SwitchingPlacement { StartPsiPsiDot, BothEndsPsi };

/// Prescribed arc sequence; the number of interior switching-time
/// unknowns is always len(arcs) - 1.
struct ArcStructure {
  std::vector<ControlMode> arcs{ControlMode::Regularized};
  SwitchingPlacement switching_placement = SwitchingPlacement::StartPsiPsiDot;
  int n_switch() const { return static_cast<int>(arcs.size()) - 1; }
  /// unknowns = 7 costates + t_f + switching times
  int unknown_dim() const { return 8 + n_switch(); }
  /// Residual and unknown dimensions agree iff every switching time is
  /// accounted for by a singular-arc condition.
  bool valid() const {
    int singular = 0;
    for (auto m : arcs)
      if (m == ControlMode::Singular) ++singular;
    return !arcs.empty() && 2 * singular == n_switch();
  }
};

/// Unknown vector layout: [p_r0(3), p_v0(3), p_m0, t_f, s_1..s_k] with
/// switching times in normalized time, 0 < s_1 < ... < s_k < 1.
struct ShootingUnknowns {
  Vec3 p_r0;
  Vec3 p_v0;
  double p_m0 = 0.0;
  double t_f = 0.2;
  std::vector<double> t_switch;

  VectorXd pack() const;
  static ShootingUnknowns unpack(const VectorXd& z);
};

struct ArcDiagnostics {
  double alpha_raw_min = 0.0;
  double alpha_raw_max = 0.0;
  double psi_min = 0.0;
  double psi_max = 0.0;
};

struct ResidualDiagnostics {
  std::vector<ArcDiagnostics> per_arc;
  bool structure_violation = false;
};

/// Single-shooting residual for a prescribed structure. Residual order:
/// terminal r(1)-rf (3), transversality p_v(1) (3) and p_m(1) (1),
/// free-time H(1) (1), then per singular arc psi and psi_dot at its start.
/// Switching-time continuity of state and costate is automatic (arcs are
/// chained sequentially).
VectorXd shooting_residual(const VectorXd& z, const ArcStructure& structure,
                           CostConvention conv, const ModelParams& prm,
                           const BoundaryConditions& bc,
                           const odeint::IvpOptions& integ,
                           ResidualDiagnostics* diag = nullptr);

struct NewtonOptions {
  int max_iter = 100;
  double tol = 5e-4;
  double fd_step = 1e-7;
  double damping = 0.5;
  int max_halvings = 30;
  bool estimate_condition = true;
};

struct NewtonDiagnostics {
  double residual_norm = 0.0;
  int iterations = 0;
  double condition_estimate = 0.0;
};

/// Damped Newton with forward-difference Jacobian and LU factorization.
/// Jacobian columns evaluate concurrently (capped by GODDARD_THREADS).
VectorXd newton_solve(const std::function<VectorXd(const VectorXd&)>& F,
                      VectorXd z0, const NewtonOptions& opts,
                      NewtonDiagnostics* diag = nullptr);

struct TracePoint {
  double s = 0.0;       // normalized time
  double t = 0.0;       // physical time
  ExtremalPoint e;
  Vec3 u;
  double u_norm = 0.0;
  double psi = 0.0;
  double H = 0.0;
  double alpha_raw = 0.0;
  int arc = 0;
};

struct Solution {
  VectorXd unknowns;
  ArcStructure structure;
  CostConvention conv = CostConvention::MinFuel;
  double t_f = 0.0;
  double objective = 0.0;   // consumed mass m0 - m(t_f) = b * integral |u|
  double final_mass = 0.0;
  std::vector<double> switch_times_physical;
  std::vector<TracePoint> trace;
  ResidualDiagnostics residual_diag;
  NewtonDiagnostics newton_diag;
};

/// Newton-solve the shooting problem from z0 and reintegrate the
/// converged unknowns with a dense trace.
Solution solve_indirect(const ArcStructure& structure, CostConvention conv,
                        const ModelParams& prm, const BoundaryConditions& bc,
                        const VectorXd& z0, const NewtonOptions& nopts,
                        const odeint::IvpOptions& integ);

/// Dense reintegration of a converged (or candidate) unknown vector.
std::vector<TracePoint> trace_solution(const VectorXd& z,
                                       const ArcStructure& structure,
                                       CostConvention conv,
                                       const ModelParams& prm,
                                       const BoundaryConditions& bc,
                                       const odeint::IvpOptions& integ);

}  // namespace goddard
