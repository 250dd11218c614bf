#include "goddard/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "goddard/parallel.hpp"

namespace goddard {

namespace {

constexpr double kAlphaSlack = 1e-6;

Control endpoint_control(const ExtremalPoint& e, CostConvention conv,
                         ControlMode mode, const ModelParams& prm) {
  return control_law(e.x, e.p, conv, mode, prm).u;
}

void update_arc_diag(ArcDiagnostics& d, bool first, double alpha_raw,
                     double psi) {
  if (first) {
    d.alpha_raw_min = d.alpha_raw_max = alpha_raw;
    d.psi_min = d.psi_max = psi;
  } else {
    d.alpha_raw_min = std::min(d.alpha_raw_min, alpha_raw);
    d.alpha_raw_max = std::max(d.alpha_raw_max, alpha_raw);
    d.psi_min = std::min(d.psi_min, psi);
    d.psi_max = std::max(d.psi_max, psi);
  }
}

}  // namespace

VectorXd ShootingUnknowns::pack() const {
  VectorXd z(8 + t_switch.size());
  z.segment<3>(0) = p_r0;
  z.segment<3>(3) = p_v0;
  z(6) = p_m0;
  z(7) = t_f;
  for (size_t i = 0; i < t_switch.size(); ++i) z(8 + i) = t_switch[i];
  return z;
}

ShootingUnknowns ShootingUnknowns::unpack(const VectorXd& z) {
  ShootingUnknowns u;
  u.p_r0 = z.segment<3>(0);
  u.p_v0 = z.segment<3>(3);
  u.p_m0 = z(6);
  u.t_f = z(7);
  u.t_switch.assign(z.data() + 8, z.data() + z.size());
  return u;
}

VectorXd shooting_residual(const VectorXd& z, const ArcStructure& structure,
                           CostConvention conv, const ModelParams& prm,
                           const BoundaryConditions& bc,
                           const odeint::IvpOptions& integ,
                           ResidualDiagnostics* diag) {
  const int ns = structure.n_switch();
  if (z.size() != structure.unknown_dim())
    throw InvalidUnknowns("shooting_residual: unknown/structure dimension mismatch");
  const ShootingUnknowns u = ShootingUnknowns::unpack(z);
  if (!(u.t_f > 0.0)) throw InvalidUnknowns("shooting_residual: t_f <= 0");
  double prev = 0.0;
  for (double s : u.t_switch) {
    if (!(s > prev && s < 1.0))
      throw InvalidUnknowns("shooting_residual: switching times not increasing in (0,1)");
    prev = s;
  }

  ExtremalPoint e0;
  e0.x = RocketState{bc.r0, bc.v0, bc.m0};
  e0.p = Costate{u.p_r0, u.p_v0, u.p_m0};
  e0.t_f = u.t_f;
  e0.p_tf = 0.0;
  if (degeneracy_check(e0))
    throw DegenerateExtremal("shooting_residual: degenerate initial costate, arcs cannot be classified");

  ResidualDiagnostics local;
  local.per_arc.resize(structure.arcs.size());

  VectorXd res(structure.unknown_dim());
  std::vector<double> knots{0.0};
  knots.insert(knots.end(), u.t_switch.begin(), u.t_switch.end());
  knots.push_back(1.0);

  Vec16 y = e0.pack();
  std::vector<double> sw_rows;
  for (size_t a = 0; a < structure.arcs.size(); ++a) {
    const ControlMode mode = structure.arcs[a];
    if (mode == ControlMode::Singular) {
      const ExtremalPoint es = ExtremalPoint::unpack(y);
      sw_rows.push_back(switching(es.x, es.p, conv, prm));
      if (structure.switching_placement == SwitchingPlacement::StartPsiPsiDot)
        sw_rows.push_back(xi(es.x, es.p, prm));
    }
    auto& ad = local.per_arc[a];
    bool first = true;
    auto rhs = [&](double, const Vec16& yy) {
      const ExtremalDerivative d = extremal_rhs(yy, conv, mode, prm);
      if (mode == ControlMode::Singular) {
        const ExtremalPoint ep = ExtremalPoint::unpack(yy);
        update_arc_diag(ad, first, d.alpha_raw, switching(ep.x, ep.p, conv, prm));
        first = false;
        if (d.alpha_raw < -kAlphaSlack || d.alpha_raw > 1.0 + kAlphaSlack)
          local.structure_violation = true;
      }
      return d.dyds;
    };
    try {
      y = odeint::integrate(rhs, y, knots[a], knots[a + 1], integ).y_end;
    } catch (const odeint::StepSizeUnderflow& ex) {
      throw IntegrationFailed(ex.what());
    } catch (const odeint::NonFiniteRhs& ex) {
      throw IntegrationFailed(ex.what());
    }
    if (mode == ControlMode::Singular &&
        structure.switching_placement == SwitchingPlacement::BothEndsPsi) {
      const ExtremalPoint es = ExtremalPoint::unpack(y);
      sw_rows.push_back(switching(es.x, es.p, conv, prm));
    }
  }
  if (static_cast<int>(sw_rows.size()) != ns)
    throw InvalidUnknowns(
        "shooting_residual: switching residual count != switching-time unknowns");
  for (int i = 0; i < ns; ++i) res(8 + i) = sw_rows[i];

  const ExtremalPoint ef = ExtremalPoint::unpack(y);
  const Control uf = endpoint_control(ef, conv, structure.arcs.back(), prm);
  res.segment<3>(0) = ef.x.r - bc.rf;
  res.segment<3>(3) = ef.p.p_v;
  res(6) = ef.p.p_m;
  res(7) = hamiltonian(ef.x, ef.p, uf, conv, prm.lambda, prm);
  if (diag) *diag = local;
  return res;
}

VectorXd newton_solve(const std::function<VectorXd(const VectorXd&)>& F,
                      VectorXd z, const NewtonOptions& opts,
                      NewtonDiagnostics* diag) {
  const int n = static_cast<int>(z.size());
  VectorXd f = F(z);
  if (f.size() != n)
    throw std::invalid_argument("newton_solve: F must be square");
  double fnorm = f.norm();
  NewtonDiagnostics nd;

  int iter = 0;
  for (; iter < opts.max_iter && fnorm > opts.tol; ++iter) {
    // Forward-difference Jacobian, columns in parallel.
    MatrixXd J(n, n);
    std::vector<char> colfail(n, 0);
    parallel_for(n, [&](int i) {
      try {
        VectorXd zp = z;
        const double h = opts.fd_step * (1.0 + std::abs(z(i)));
        zp(i) += h;
        J.col(i) = (F(zp) - f) / h;
      } catch (...) {
        colfail[i] = 1;
      }
    });
    for (int i = 0; i < n; ++i) {
      if (colfail[i]) {
        // Retry with a backward step before giving up on the column.
        VectorXd zp = z;
        const double h = opts.fd_step * (1.0 + std::abs(z(i)));
        zp(i) -= h;
        J.col(i) = (f - F(zp)) / h;
      }
    }

    auto backtrack = [&](const VectorXd& dz) {
      double damp = 1.0;
      for (int k = 0; k <= opts.max_halvings; ++k) {
        const VectorXd zt = z - damp * dz;
        try {
          VectorXd ft = F(zt);
          const double fn = ft.norm();
          if (fn < fnorm) {
            z = zt;
            f = std::move(ft);
            fnorm = fn;
            return true;
          }
        } catch (...) {
          // step left the admissible region; keep halving
        }
        damp *= opts.damping;
      }
      return false;
    };

    Eigen::FullPivLU<MatrixXd> lu(J);
    bool accepted = lu.isInvertible() && backtrack(lu.solve(f));
    if (!accepted) {
      // Rank-deficient Jacobian or stalled line search: fall back to
      // Levenberg-Marquardt steps with an increasing damping parameter.
      const MatrixXd JtJ = J.transpose() * J;
      const VectorXd Jtf = J.transpose() * f;
      double mu = 1e-10 * std::max(1.0, JtJ.trace());
      for (int k = 0; k < 12 && !accepted; ++k) {
        const VectorXd dz =
            (JtJ + mu * MatrixXd::Identity(n, n)).ldlt().solve(Jtf);
        accepted = backtrack(dz);
        mu *= 100.0;
      }
    }
    if (!accepted) {
      if (!lu.isInvertible())
        throw SingularJacobian("newton_solve: singular Jacobian");
      throw LineSearchFailed("newton_solve: no decrease after backtracking");
    }
  }

  nd.residual_norm = fnorm;
  nd.iterations = iter;
  if (fnorm > opts.tol)
    throw MaxIterationsExceeded("newton_solve: residual above tolerance after max_iter");
  if (opts.estimate_condition) {
    // condition estimate of the final Jacobian via SVD
    MatrixXd J(n, n);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      try {
        VectorXd zp = z;
        const double h = opts.fd_step * (1.0 + std::abs(z(i)));
        zp(i) += h;
        J.col(i) = (F(zp) - f) / h;
      } catch (...) {
        ok = false;
      }
    }
    if (ok) {
      Eigen::JacobiSVD<MatrixXd> svd(J);
      const auto& sv = svd.singularValues();
      nd.condition_estimate =
          sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                : std::numeric_limits<double>::infinity();
    }
  }
  if (diag) *diag = nd;
  return z;
}

std::vector<TracePoint> trace_solution(const VectorXd& z,
                                       const ArcStructure& structure,
                                       CostConvention conv,
                                       const ModelParams& prm,
                                       const BoundaryConditions& bc,
                                       const odeint::IvpOptions& integ) {
  const ShootingUnknowns u = ShootingUnknowns::unpack(z);
  std::vector<double> knots{0.0};
  knots.insert(knots.end(), u.t_switch.begin(), u.t_switch.end());
  knots.push_back(1.0);

  ExtremalPoint e0;
  e0.x = RocketState{bc.r0, bc.v0, bc.m0};
  e0.p = Costate{u.p_r0, u.p_v0, u.p_m0};
  e0.t_f = u.t_f;

  odeint::IvpOptions traced = integ;
  traced.record_trace = true;

  std::vector<TracePoint> trace;
  Vec16 y = e0.pack();
  for (size_t a = 0; a < structure.arcs.size(); ++a) {
    const ControlMode mode = structure.arcs[a];
    auto rhs = [&](double, const Vec16& yy) {
      return extremal_rhs(yy, conv, mode, prm).dyds;
    };
    auto result = odeint::integrate(rhs, y, knots[a], knots[a + 1], traced);
    for (const auto& [s, yy] : result.trace) {
      if (!trace.empty() && s == trace.back().s) continue;
      TracePoint tp;
      tp.s = s;
      tp.e = ExtremalPoint::unpack(yy);
      tp.t = s * tp.e.t_f;
      const ControlResult cr = control_law(tp.e.x, tp.e.p, conv, mode, prm);
      tp.u = cr.u.u;
      tp.u_norm = cr.u.u.norm();
      tp.alpha_raw = cr.alpha_raw;
      tp.psi = switching(tp.e.x, tp.e.p, conv, prm);
      tp.H = hamiltonian(tp.e.x, tp.e.p, cr.u, conv, prm.lambda, prm);
      tp.arc = static_cast<int>(a);
      trace.push_back(tp);
    }
    y = result.y_end;
  }
  return trace;
}

Solution solve_indirect(const ArcStructure& structure, CostConvention conv,
                        const ModelParams& prm, const BoundaryConditions& bc,
                        const VectorXd& z0, const NewtonOptions& nopts,
                        const odeint::IvpOptions& integ) {
  Solution sol;
  sol.structure = structure;
  sol.conv = conv;
  auto F = [&](const VectorXd& z) {
    return shooting_residual(z, structure, conv, prm, bc, integ);
  };
  sol.unknowns = newton_solve(F, z0, nopts, &sol.newton_diag);
  shooting_residual(sol.unknowns, structure, conv, prm, bc, integ,
                    &sol.residual_diag);
  if (sol.residual_diag.structure_violation)
    throw StructureViolation(
        "solve_indirect: raw singular alpha outside [0,1] at the converged solution");

  const ShootingUnknowns u = ShootingUnknowns::unpack(sol.unknowns);
  sol.t_f = u.t_f;
  for (double s : u.t_switch) sol.switch_times_physical.push_back(s * u.t_f);
  sol.trace = trace_solution(sol.unknowns, structure, conv, prm, bc, integ);
  sol.final_mass = sol.trace.back().e.x.m;
  sol.objective = bc.m0 - sol.final_mass;
  return sol;
}

}  // namespace goddard
