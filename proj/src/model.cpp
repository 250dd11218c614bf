#include "goddard/model.hpp"

#include <cmath>

namespace goddard {

namespace {
constexpr double kTinyVelocity = 1e-14;
}

double drag(const Vec3& r, const Vec3& v, const ModelParams& p) {
  const double rn = r.norm();
  return p.theta * p.K_D * v.squaredNorm() * std::exp(-p.k * (rn - 1.0));
}

DragPartials drag_partials(const Vec3& r, const Vec3& v, const ModelParams& p) {
  DragPartials out;
  const double rn = r.norm();
  const double D = drag(r, v, p);
  out.dD_dr = -p.k * D / rn * r;
  const double v2 = v.squaredNorm();
  if (v2 > kTinyVelocity * kTinyVelocity) {
    out.dD_dv = 2.0 * D / v2 * v;
  }
  return out;
}

Vec3 gravity(const Vec3& r, const ModelParams& p) {
  const double rn = r.norm();
  return p.g0 / (rn * rn * rn) * r;
}

Mat3 gravity_jacobian(const Vec3& r, const ModelParams& p) {
  const double rn = r.norm();
  const double rn3 = rn * rn * rn;
  const double rn5 = rn3 * rn * rn;
  return p.g0 * (Mat3::Identity() / rn3 - 3.0 / rn5 * r * r.transpose());
}

StateDerivative state_rhs(const RocketState& x, const Control& u,
                          const ModelParams& p) {
  if (x.m <= 0.0) throw NonpositiveMass("state_rhs: m <= 0");
  StateDerivative d;
  d.rdot = x.v;
  d.vdot = -gravity(x.r, p) + (p.C / x.m) * u.u;
  const double vn = x.v.norm();
  if (vn > kTinyVelocity) {
    d.vdot -= drag(x.r, x.v, p) / (x.m * vn) * x.v;
  }
  d.mdot = -p.b * u.u.norm();
  return d;
}

StateJacobians state_rhs_jacobians(const RocketState& x, const Control& u,
                                   const ModelParams& p, double u_norm_eps) {
  if (x.m <= 0.0) throw NonpositiveMass("state_rhs_jacobians: m <= 0");
  StateJacobians J;
  J.dfdx.setZero();
  J.dfdu.setZero();
  J.dfdx.block<3, 3>(0, 3).setIdentity();

  const double m = x.m;
  J.dfdx.block<3, 3>(3, 0) = -gravity_jacobian(x.r, p);
  J.dfdx.block<3, 1>(3, 6) = -(p.C / (m * m)) * u.u;

  const double vn = x.v.norm();
  if (vn > kTinyVelocity) {
    const double D = drag(x.r, x.v, p);
    const DragPartials dp = drag_partials(x.r, x.v, p);
    const Vec3 vhat = x.v / vn;
    // d/dr [-(D/m) vhat] = -(1/m) vhat dD_dr^T
    J.dfdx.block<3, 3>(3, 0) -= (1.0 / m) * vhat * dp.dD_dr.transpose();
    // d/dv [-(D/m) vhat]
    J.dfdx.block<3, 3>(3, 3) -=
        (1.0 / m) * (vhat * dp.dD_dv.transpose() +
                     D * (Mat3::Identity() / vn -
                          x.v * x.v.transpose() / (vn * vn * vn)));
    // d/dm
    J.dfdx.block<3, 1>(3, 6) += (D / (m * m)) * vhat;
  }

  J.dfdu.block<3, 3>(3, 0) = (p.C / m) * Mat3::Identity();
  const double un = std::sqrt(u.u.squaredNorm() + u_norm_eps * u_norm_eps);
  if (un > 0.0) {
    J.dfdu.block<1, 3>(6, 0) = -(p.b / un) * u.u.transpose();
  }
  return J;
}

}  // namespace goddard
