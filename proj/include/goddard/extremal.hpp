#pragma once

#include "goddard/model.hpp"

namespace goddard {

using Vec16 = Eigen::Matrix<double, 16, 1>;

struct ZeroVelocity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ZeroPv : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateA : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateExtremal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Costate {
  Vec3 p_r;
  Vec3 p_v;
  double p_m = 0.0;
};

/// Cost convention: FinalMass maximizes m(t_f) with switching function
/// Psi = C|p_v|/m - b p_m; MinFuel minimizes the fuel integral with the
/// normalized multiplier p0 = -1, switching psi = C|p_v|/m - (1 + b p_m).
enum class CostConvention { FinalMass, MinFuel };

enum class ControlMode { Bang, Regularized, Singular, MaxThrust, NullThrust };

/// Augmented point for the fixed-horizon reformulation t = t_f * s:
/// layout [r(3), v(3), m, p_r(3), p_v(3), p_m, t_f, p_tf].
struct ExtremalPoint {
  RocketState x;
  Costate p;
  double t_f = 0.0;
  double p_tf = 0.0;

  Vec16 pack() const;
  static ExtremalPoint unpack(const Vec16& y);
};

double hamiltonian(const RocketState& x, const Costate& p, const Control& u,
                   CostConvention conv, double lambda, const ModelParams& prm);

struct CostateDerivative {
  Vec3 pr_dot;
  Vec3 pv_dot;
  double pm_dot;
};

/// Adjoint equations. Drag-coupling terms use the continuous extension
/// (they all vanish as v -> 0).
CostateDerivative costate_rhs(const RocketState& x, const Costate& p,
                              const Control& u, const ModelParams& prm);

double switching(const RocketState& x, const Costate& p, CostConvention conv,
                 const ModelParams& prm);

/// The u-independent part of dPsi/dt along the extremal flow; on singular
/// arcs Psi_dot = Xi = 0 is one of the two constraint equations.
double xi(const RocketState& x, const Costate& p, const ModelParams& prm);

/// Second derivative of the switching function with control u = alpha *
/// p_v/|p_v|, computed as a directional derivative of Xi along the flow.
/// Exactly affine in alpha by construction.
double psi_ddot(const RocketState& x, const Costate& p, double alpha,
                CostConvention conv, const ModelParams& prm);

/// Singular control magnitude from A*alpha = B, by affine sampling of
/// psi_ddot at alpha = 0 and 1. Returns the raw (unclamped) value.
double singular_alpha(const RocketState& x, const Costate& p,
                      CostConvention conv, const ModelParams& prm);

struct ControlResult {
  Control u;
  double alpha_raw = 0.0;  // meaningful in Singular mode only
};

ControlResult control_law(const RocketState& x, const Costate& p,
                          CostConvention conv, ControlMode mode,
                          const ModelParams& prm, double tol_sw = 1e-6);

struct ExtremalDerivative {
  Vec16 dyds;
  Control u;
  double H = 0.0;
  double alpha_raw = 0.0;
};

/// RHS of the 16-dimensional augmented system in normalized time s,
/// all components scaled by t_f; dt_f/ds = 0 and dp_tf/ds = -t_f * H.
ExtremalDerivative extremal_rhs(const Vec16& y, CostConvention conv,
                                ControlMode mode, const ModelParams& prm);

/// Degenerate extremals (p_r = p_v = 0 identically) carry no structure
/// information and are rejected before arc classification.
bool degeneracy_check(const ExtremalPoint& e, double tol = 1e-9);

}  // namespace goddard
