#include "goddard/extremal.hpp"

#include <algorithm>
#include <cmath>

namespace goddard {

namespace {
constexpr double kTinyVelocity = 1e-12;
constexpr double kTinyPv = 1e-12;

using Vec14 = Eigen::Matrix<double, 14, 1>;

Vec14 pack14(const RocketState& x, const Costate& p) {
  Vec14 z;
  z << x.r, x.v, x.m, p.p_r, p.p_v, p.p_m;
  return z;
}

void unpack14(const Vec14& z, RocketState& x, Costate& p) {
  x.r = z.segment<3>(0);
  x.v = z.segment<3>(3);
  x.m = z(6);
  p.p_r = z.segment<3>(7);
  p.p_v = z.segment<3>(10);
  p.p_m = z(13);
}

double xi14(const Vec14& z, const ModelParams& prm) {
  RocketState x;
  Costate p;
  unpack14(z, x, p);
  return xi(x, p, prm);
}

/// Physical-time flow of (x, p) under control alpha * p_v/|p_v|.
Vec14 flow14(const RocketState& x, const Costate& p, double alpha,
             const ModelParams& prm) {
  Control u;
  u.u = alpha * p.p_v.normalized();
  const StateDerivative xd = state_rhs(x, u, prm);
  const CostateDerivative pd = costate_rhs(x, p, u, prm);
  Vec14 d;
  d << xd.rdot, xd.vdot, xd.mdot, pd.pr_dot, pd.pv_dot, pd.pm_dot;
  return d;
}

/// Central difference of Xi along direction d, step scaled to the point.
double xi_directional(const Vec14& z, const Vec14& d, const ModelParams& prm) {
  const double dn = d.norm();
  if (dn == 0.0) return 0.0;
  const double h = 1e-6 * (1.0 + z.norm());
  const Vec14 dir = d / dn;
  return dn * (xi14(z + h * dir, prm) - xi14(z - h * dir, prm)) / (2.0 * h);
}

}  // namespace

Vec16 ExtremalPoint::pack() const {
  Vec16 y;
  y << x.r, x.v, x.m, p.p_r, p.p_v, p.p_m, t_f, p_tf;
  return y;
}

ExtremalPoint ExtremalPoint::unpack(const Vec16& y) {
  ExtremalPoint e;
  e.x.r = y.segment<3>(0);
  e.x.v = y.segment<3>(3);
  e.x.m = y(6);
  e.p.p_r = y.segment<3>(7);
  e.p.p_v = y.segment<3>(10);
  e.p.p_m = y(13);
  e.t_f = y(14);
  e.p_tf = y(15);
  return e;
}

double hamiltonian(const RocketState& x, const Costate& p, const Control& u,
                   CostConvention conv, double lambda, const ModelParams& prm) {
  const StateDerivative d = state_rhs(x, u, prm);
  double H = p.p_r.dot(d.rdot) + p.p_v.dot(d.vdot);
  const double un = u.u.norm();
  if (conv == CostConvention::FinalMass) {
    H -= prm.b * p.p_m * un;
  } else {
    H -= (1.0 + prm.b * p.p_m) * un + (1.0 - lambda) * un * un;
  }
  return H;
}

CostateDerivative costate_rhs(const RocketState& x, const Costate& p,
                              const Control& u, const ModelParams& prm) {
  if (x.m <= 0.0) throw NonpositiveMass("costate_rhs: m <= 0");
  CostateDerivative d;
  const double m = x.m;
  d.pr_dot = gravity_jacobian(x.r, prm) * p.p_v;
  d.pv_dot = -p.p_r;
  d.pm_dot = (prm.C / (m * m)) * p.p_v.dot(u.u);

  const double vn = x.v.norm();
  if (vn > kTinyVelocity) {
    const double D = drag(x.r, x.v, prm);
    const DragPartials dp = drag_partials(x.r, x.v, prm);
    const double pvv = p.p_v.dot(x.v);
    d.pr_dot += pvv / (m * vn) * dp.dD_dr;
    d.pv_dot += pvv / (m * vn) * dp.dD_dv + D / (m * vn) * p.p_v -
                (D / m) * pvv / (vn * vn * vn) * x.v;
    d.pm_dot += -(D / (m * m)) * pvv / vn + (dp.dD_dm / m) * pvv / vn;
  }
  return d;
}

double switching(const RocketState& x, const Costate& p, CostConvention conv,
                 const ModelParams& prm) {
  const double psi = prm.C / x.m * p.p_v.norm() - prm.b * p.p_m;
  return conv == CostConvention::FinalMass ? psi : psi - 1.0;
}

double xi(const RocketState& x, const Costate& p, const ModelParams& prm) {
  const double vn = x.v.norm();
  if (vn < kTinyVelocity) throw ZeroVelocity("xi: v = 0");
  const double pvn = p.p_v.norm();
  if (pvn < kTinyPv) throw ZeroPv("xi: p_v = 0");
  const double m = x.m;
  const double D = drag(x.r, x.v, prm);
  const DragPartials dp = drag_partials(x.r, x.v, prm);
  const double pvv = p.p_v.dot(x.v);
  // u-independent part of Psi_dot, from the chain rule on
  // Psi = C |p_v|/m - b p_m along the adjoint flow.
  const double term_m = prm.b * (D / (m * m) - dp.dD_dm / m) * (pvv / vn);
  const double bracket = -p.p_v.dot(p.p_r) +
                         pvv / (m * vn) * dp.dD_dv.dot(p.p_v) +
                         D / (m * vn) * pvn * pvn -
                         (D / m) * pvv * pvv / (vn * vn * vn);
  return term_m + prm.C / (m * pvn) * bracket;
}

double psi_ddot(const RocketState& x, const Costate& p, double alpha,
                CostConvention /*conv*/, const ModelParams& prm) {
  const double vn = x.v.norm();
  if (vn < kTinyVelocity) throw ZeroVelocity("psi_ddot: v = 0");
  if (p.p_v.norm() < kTinyPv) throw ZeroPv("psi_ddot: p_v = 0");
  const Vec14 z = pack14(x, p);
  const Vec14 d0 = flow14(x, p, 0.0, prm);
  const Vec14 d1 = flow14(x, p, 1.0, prm);
  return xi_directional(z, d0, prm) + alpha * xi_directional(z, d1 - d0, prm);
}

double singular_alpha(const RocketState& x, const Costate& p,
                      CostConvention conv, const ModelParams& prm) {
  const double a0 = psi_ddot(x, p, 0.0, conv, prm);
  const double a1 = psi_ddot(x, p, 1.0, conv, prm);
  const double A = a1 - a0;
  const double epsA = 1e-9 * std::max({std::abs(a0), std::abs(a1), 1.0});
  if (std::abs(A) < epsA) throw DegenerateA("singular_alpha: |A| below threshold");
  return -a0 / A;
}

ControlResult control_law(const RocketState& x, const Costate& p,
                          CostConvention conv, ControlMode mode,
                          const ModelParams& prm, double /*tol_sw*/) {
  ControlResult out;
  const double pvn = p.p_v.norm();
  switch (mode) {
    case ControlMode::NullThrust:
      break;
    case ControlMode::MaxThrust:
      if (pvn < kTinyPv) throw ZeroPv("control_law: p_v = 0 on max-thrust arc");
      out.u.u = p.p_v / pvn;
      break;
    case ControlMode::Bang: {
      if (switching(x, p, conv, prm) > 0.0) {
        if (pvn < kTinyPv) throw ZeroPv("control_law: p_v = 0 with Psi > 0");
        out.u.u = p.p_v / pvn;
      }
      break;
    }
    case ControlMode::Regularized: {
      if (pvn < kTinyPv) break;
      const double psi = switching(x, p, conv, prm);
      const double rho =
          std::clamp(psi / (2.0 * (1.0 - prm.lambda)), 0.0, 1.0);
      out.u.u = rho * p.p_v / pvn;
      break;
    }
    case ControlMode::Singular: {
      if (pvn < kTinyPv) throw ZeroPv("control_law: p_v = 0 on singular arc");
      out.alpha_raw = singular_alpha(x, p, conv, prm);
      const double a = std::clamp(out.alpha_raw, 0.0, 1.0);
      out.u.u = a * p.p_v / pvn;
      break;
    }
  }
  return out;
}

ExtremalDerivative extremal_rhs(const Vec16& y, CostConvention conv,
                                ControlMode mode, const ModelParams& prm) {
  const ExtremalPoint e = ExtremalPoint::unpack(y);
  ExtremalDerivative out;
  const ControlResult cr = control_law(e.x, e.p, conv, mode, prm);
  out.u = cr.u;
  out.alpha_raw = cr.alpha_raw;
  out.H = hamiltonian(e.x, e.p, cr.u, conv, prm.lambda, prm);
  const StateDerivative xd = state_rhs(e.x, cr.u, prm);
  const CostateDerivative pd = costate_rhs(e.x, e.p, cr.u, prm);
  Vec16 d;
  d << xd.rdot, xd.vdot, xd.mdot, pd.pr_dot, pd.pv_dot, pd.pm_dot, 0.0, -out.H;
  out.dyds = e.t_f * d;
  return out;
}

bool degeneracy_check(const ExtremalPoint& e, double tol) {
  return e.p.p_r.norm() + e.p.p_v.norm() < tol;
}

}  // namespace goddard
