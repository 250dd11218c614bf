#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace goddard {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct NonpositiveMass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// State of the ascent model: position (Earth radii), velocity and mass,
/// all normalized by the initial radius / mass / surface gravity.
struct RocketState {
  Vec3 r;
  Vec3 v;
  double m = 1.0;
};

/// Normalized thrust vector, |u| <= 1.
struct Control {
  Vec3 u = Vec3::Zero();
};

/// Physical constants plus the two homotopy scalars:
/// theta scales the drag coefficient, lambda is the regularization level
/// (quadratic control cost weight is 1 - lambda).
struct ModelParams {
  double C = 3.5;     // maximal thrust modulus
  double b = 7.0;     // mass-flow coefficient (ejection speed C/b)
  double g0 = 1.0;
  double K_D = 310.0;
  double k = 500.0;   // drag altitude exponent
  double theta = 1.0;
  double lambda = 1.0;
};

struct BoundaryConditions {
  Vec3 r0{0.999949994, 0.0001, 0.01};
  Vec3 v0{0.0, 0.0, 0.0};
  double m0 = 1.0;
  Vec3 rf{1.01, 0.0, 0.0};
  // v(t_f), m(t_f) and t_f are free.
};

struct DragPartials {
  Vec3 dD_dr = Vec3::Zero();
  Vec3 dD_dv = Vec3::Zero();
  double dD_dm = 0.0;  // identically zero for this drag model; slot kept
                       // so mass-dependent models can populate it
};

/// D(r,v) = theta * K_D * |v|^2 * exp(-k(|r|-1))
double drag(const Vec3& r, const Vec3& v, const ModelParams& p);

DragPartials drag_partials(const Vec3& r, const Vec3& v, const ModelParams& p);

/// g(r) = g0 * r / |r|^3
Vec3 gravity(const Vec3& r, const ModelParams& p);

/// dg/dr = g0 * (I/|r|^3 - 3 r r^T / |r|^5), symmetric and trace-free.
Mat3 gravity_jacobian(const Vec3& r, const ModelParams& p);

struct StateDerivative {
  Vec3 rdot;
  Vec3 vdot;
  double mdot;
};

/// Right-hand side of the ascent dynamics. The drag acceleration
/// (D/m) v/|v| extends continuously by zero at v = 0 (the launch point
/// has v0 = 0, so the very first evaluation hits this).
StateDerivative state_rhs(const RocketState& x, const Control& u,
                          const ModelParams& p);

/// Jacobians of state_rhs needed by the direct solver's discrete adjoint.
/// u_norm_eps smooths |u| as sqrt(|u|^2 + eps^2) in the mass-flow row.
struct StateJacobians {
  Eigen::Matrix<double, 7, 7> dfdx;
  Eigen::Matrix<double, 7, 3> dfdu;
};
StateJacobians state_rhs_jacobians(const RocketState& x, const Control& u,
                                   const ModelParams& p, double u_norm_eps);

}  // namespace goddard
