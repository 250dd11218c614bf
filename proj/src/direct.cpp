#include "goddard/direct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <random>

namespace goddard::direct {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;

Vec7 pack7(const RocketState& x) {
  Vec7 y;
  y.segment<3>(0) = x.r;
  y.segment<3>(3) = x.v;
  y(6) = x.m;
  return y;
}

RocketState unpack7(const Vec7& y) {
  return RocketState{y.segment<3>(0), y.segment<3>(3), y(6)};
}

double smooth_norm(const Vec3& u, double eps) {
  return std::sqrt(u.squaredNorm() + eps * eps) - eps;
}

/// Dynamics with the mass-flow row smoothed to match the adjoint.
Vec7 rhs7(const Vec7& y, const Vec3& u, const ModelParams& prm, double eps) {
  const RocketState x = unpack7(y);
  const StateDerivative d = state_rhs(x, Control{u}, prm);
  Vec7 f;
  f.segment<3>(0) = d.rdot;
  f.segment<3>(3) = d.vdot;
  f(6) = -prm.b * smooth_norm(u, eps);
  return f;
}

Vec7 rk4_step(const Vec7& y, const Vec3& u, double dt, const ModelParams& prm,
              double eps, Vec7 stages[4] = nullptr) {
  const Vec7 s1 = y;
  const Vec7 k1 = rhs7(s1, u, prm, eps);
  const Vec7 s2 = y + 0.5 * dt * k1;
  const Vec7 k2 = rhs7(s2, u, prm, eps);
  const Vec7 s3 = y + 0.5 * dt * k2;
  const Vec7 k3 = rhs7(s3, u, prm, eps);
  const Vec7 s4 = y + dt * k3;
  const Vec7 k4 = rhs7(s4, u, prm, eps);
  if (stages) {
    stages[0] = s1;
    stages[1] = s2;
    stages[2] = s3;
    stages[3] = s4;
  }
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Jacobians of one RK4 step by the chain rule through the four stages.
void rk4_step_jacobians(const Vec7 stages[4], const Vec3& u, double dt,
                        const ModelParams& prm, double eps,
                        Eigen::Matrix<double, 7, 7>& A,
                        Eigen::Matrix<double, 7, 3>& B) {
  using M77 = Eigen::Matrix<double, 7, 7>;
  using M73 = Eigen::Matrix<double, 7, 3>;
  StateJacobians J[4];
  for (int i = 0; i < 4; ++i)
    J[i] = state_rhs_jacobians(unpack7(stages[i]), Control{u}, prm, eps);
  const M77 I = M77::Identity();
  const M77 A1 = J[0].dfdx;
  const M77 A2 = J[1].dfdx * (I + 0.5 * dt * A1);
  const M77 A3 = J[2].dfdx * (I + 0.5 * dt * A2);
  const M77 A4 = J[3].dfdx * (I + dt * A3);
  const M73 B1 = J[0].dfdu;
  const M73 B2 = J[1].dfdx * (0.5 * dt * B1) + J[1].dfdu;
  const M73 B3 = J[2].dfdx * (0.5 * dt * B2) + J[2].dfdu;
  const M73 B4 = J[3].dfdx * (dt * B3) + J[3].dfdu;
  A = I + (dt / 6.0) * (A1 + 2.0 * A2 + 2.0 * A3 + A4);
  B = (dt / 6.0) * (B1 + 2.0 * B2 + 2.0 * B3 + B4);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Spectral projected gradient with a nonmonotone (10-deep) line search.
VectorXd spg(VectorXd z, const std::function<double(const VectorXd&)>& value,
             const std::function<VectorXd(const VectorXd&)>& grad,
             const std::function<VectorXd(const VectorXd&)>& project,
             int max_inner, double step_tol, int* iters_out) {
  z = project(z);
  double f = value(z);
  VectorXd g = grad(z);
  std::deque<double> fhist{f};
  double alpha = 1.0;
  int it = 0;
  for (; it < max_inner; ++it) {
    const VectorXd d = project(z - alpha * g) - z;
    if (d.lpNorm<Eigen::Infinity>() < step_tol) break;
    const double gtd = g.dot(d);
    const double fmax = *std::max_element(fhist.begin(), fhist.end());
    double tau = 1.0;
    VectorXd zn;
    double fn = kInf;
    for (int h = 0; h < 40; ++h) {
      zn = z + tau * d;
      fn = value(zn);
      if (fn <= fmax + 1e-4 * tau * gtd) break;
      tau *= 0.5;
    }
    if (!(fn < kInf)) break;
    const VectorXd gn = grad(zn);
    const VectorXd s = zn - z;
    const VectorXd y = gn - g;
    const double sy = s.dot(y);
    alpha = sy > 1e-16 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e8) : 1.0;
    z = std::move(zn);
    f = fn;
    g = gn;
    fhist.push_back(f);
    if (fhist.size() > 10) fhist.pop_front();
  }
  if (iters_out) *iters_out += it;
  return z;
}

/// Shared augmented-Lagrangian outer loop on the terminal position
/// constraint; `solve_inner` minimizes the current augmented cost and
/// `constraint` evaluates r(t_f) - r_f at the returned point.
VectorXd augmented_lagrangian(
    VectorXd z, const DirectOptions& opts,
    const std::function<VectorXd(const VectorXd&, const Vec3&, double)>&
        solve_inner,
    const std::function<Vec3(const VectorXd&)>& constraint, int* outer_out,
    double* cnorm_out) {
  Vec3 mu = Vec3::Zero();
  double rho = opts.rho0;
  double best = kInf;
  int stall = 0;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    z = solve_inner(z, mu, rho);
    const Vec3 c = constraint(z);
    const double cn = c.norm();
    if (outer_out) *outer_out = outer + 1;
    if (cnorm_out) *cnorm_out = cn;
    if (cn <= opts.constraint_tol) return z;
    if (cn > 0.9 * best) {
      if (++stall >= 5)
        throw InfeasibleStagnation(
            "augmented Lagrangian: constraint norm stalled over 5 outer iterations");
    } else {
      stall = 0;
    }
    if (cn <= 0.5 * best) {
      mu += rho * c;
    } else {
      rho *= opts.rho_growth;
    }
    best = std::min(best, cn);
  }
  throw MaxIterations("augmented Lagrangian: outer iteration limit reached");
}

double interp_profile(const ControlProfile& p, double t) {
  if (t <= p.t.front()) return p.u_norm.front();
  if (t >= p.t.back()) return p.u_norm.back();
  const auto it = std::upper_bound(p.t.begin(), p.t.end(), t);
  const size_t j = static_cast<size_t>(it - p.t.begin());
  const double t0 = p.t[j - 1], t1 = p.t[j];
  const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  return (1.0 - w) * p.u_norm[j - 1] + w * p.u_norm[j];
}

void validate_profile(const ControlProfile& p, const char* who) {
  if (p.t.size() != p.u_norm.size() || p.t.size() < 2)
    throw GridMismatch(std::string(who) + ": control profile grid malformed");
}

}  // namespace

DirectSolution solve_direct(int N, const ModelParams& prm,
                            const BoundaryConditions& bc,
                            const DirectOptions& opts) {
  if (N < 10) throw std::invalid_argument("solve_direct: N >= 10 required");
  const int nvar = 3 * N + 1;
  const double eps = opts.u_eps;

  auto simulate = [&](const VectorXd& z, std::vector<Vec7>* nodes,
                      std::vector<std::array<Vec7, 4>>* stages) -> Vec7 {
    const double t_f = z(nvar - 1);
    const double dt = t_f / N;
    Vec7 y = pack7(RocketState{bc.r0, bc.v0, bc.m0});
    if (nodes) nodes->assign(1, y);
    if (stages) stages->resize(N);
    for (int i = 0; i < N; ++i) {
      const Vec3 u = z.segment<3>(3 * i);
      y = rk4_step(y, u, dt, prm, eps,
                   stages ? (*stages)[i].data() : static_cast<Vec7*>(nullptr));
      if (nodes) nodes->push_back(y);
    }
    return y;
  };

  auto running_cost = [&](const VectorXd& z) {
    const double t_f = z(nvar - 1);
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += smooth_norm(z.segment<3>(3 * i), eps);
    return (t_f / N) * s;
  };

  auto value_at = [&](const VectorXd& z, const Vec3& mu, double rho) {
    try {
      const Vec7 yN = simulate(z, nullptr, nullptr);
      const Vec3 c = yN.segment<3>(0) - bc.rf;
      return running_cost(z) + mu.dot(c) + 0.5 * rho * c.squaredNorm();
    } catch (const NonpositiveMass&) {
      return kInf;
    }
  };

  auto grad_at = [&](const VectorXd& z, const Vec3& mu, double rho) {
    const double t_f = z(nvar - 1);
    const double dt = t_f / N;
    std::vector<std::array<Vec7, 4>> stages;
    const Vec7 yN = simulate(z, nullptr, &stages);
    const Vec3 c = yN.segment<3>(0) - bc.rf;

    VectorXd g = VectorXd::Zero(nvar);
    Vec7 lam = Vec7::Zero();
    lam.segment<3>(0) = mu + rho * c;
    for (int i = N - 1; i >= 0; --i) {
      const Vec3 u = z.segment<3>(3 * i);
      Eigen::Matrix<double, 7, 7> A;
      Eigen::Matrix<double, 7, 3> B;
      rk4_step_jacobians(stages[i].data(), u, dt, prm, eps, A, B);
      g.segment<3>(3 * i) =
          B.transpose() * lam +
          (t_f / N) * u / std::sqrt(u.squaredNorm() + eps * eps);
      lam = A.transpose() * lam;
    }
    // t_f is held fixed inside the inner solves; the outer scalar search
    // below moves it.  Optimizing it jointly with the controls tends to
    // drag the iterate into the nearby on-off local optimum.
    g(nvar - 1) = 0.0;
    return g;
  };

  double tf_fixed = opts.t_f_init;
  auto project = [&](VectorXd z) {
    for (int i = 0; i < N; ++i) {
      const double n = z.segment<3>(3 * i).norm();
      if (n > 1.0) z.segment<3>(3 * i) /= n;
    }
    z(nvar - 1) = tf_fixed;
    return z;
  };

  const Vec3 radial = bc.r0.normalized();
  std::mt19937 rng(opts.rng_seed);
  std::uniform_real_distribution<double> pert(-0.2, 0.2);

  std::exception_ptr last_error;
  for (int seed = 0; seed < std::max(1, opts.seeds); ++seed) {
    VectorXd z0(nvar);
    // Ascent-shaped warm start: brief full thrust at lift-off, a moderate
    // sustained burn, then coast.  A constant mid-level guess tends to fall
    // into the nearby on-off local optimum instead of the interior-thrust
    // solution, and an aggressive profile would exhaust the vehicle mass.
    for (int i = 0; i < N; ++i) {
      const double frac = (i + 0.5) / N;
      const double mag = frac < 0.1 ? 1.0 : (frac < 0.4 ? 0.4 : 0.0);
      z0.segment<3>(3 * i) = mag * radial;
    }
    z0(nvar - 1) = opts.t_f_init;
    if (seed > 0) {
      for (int i = 0; i < nvar - 1; ++i) z0(i) += pert(rng);
      z0(nvar - 1) = opts.t_f_init * (1.0 + 0.4 * pert(rng));
    }
    try {
      DirectSolution sol;
      sol.seed_used = seed;
      auto inner = [&](const VectorXd& z, const Vec3& mu, double rho) {
        return spg(
            z, [&](const VectorXd& y) { return value_at(y, mu, rho); },
            [&](const VectorXd& y) { return grad_at(y, mu, rho); }, project,
            opts.max_inner, opts.step_tol, &sol.inner_iterations);
      };
      auto constraint = [&](const VectorXd& z) -> Vec3 {
        return simulate(z, nullptr, nullptr).segment<3>(0) -
               Vec3(bc.rf);
      };
      auto fuel = [&](const VectorXd& z) {
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += z.segment<3>(3 * i).norm();
        return prm.b * (z(nvar - 1) / N) * s;
      };
      // Minimize fuel at a fixed final time, warm-starting the controls.
      auto solve_fixed = [&](double tf, VectorXd zi) {
        tf_fixed = tf;
        zi(nvar - 1) = tf;
        return augmented_lagrangian(project(std::move(zi)), opts, inner,
                                    constraint, &sol.outer_iterations,
                                    &sol.constraint_norm);
      };

      // Outer scalar minimization of optimal fuel over the final time:
      // coarse bracket scan, then golden-section refinement.
      struct Eval {
        double tf = 0.0, fuel = kInf;
        VectorXd z;
      };
      auto try_fixed = [&](double tf, const VectorXd& zi) {
        Eval e;
        e.tf = tf;
        try {
          e.z = solve_fixed(tf, zi);
          e.fuel = fuel(e.z);
        } catch (const std::exception&) {
          last_error = std::current_exception();
        }
        return e;
      };
      const double lo = std::max(opts.t_f_min, 0.6 * opts.t_f_init);
      const double hi = std::min(opts.t_f_max, 1.6 * opts.t_f_init);
      constexpr int kGrid = 5;
      std::array<Eval, kGrid> grid;
      for (int g = 0; g < kGrid; ++g) {
        const double tf = lo + (hi - lo) * g / (kGrid - 1);
        const VectorXd& warm =
            (g > 0 && grid[g - 1].fuel < kInf) ? grid[g - 1].z : z0;
        grid[g] = try_fixed(tf, warm);
      }
      int kbest = 0;
      for (int g = 1; g < kGrid; ++g)
        if (grid[g].fuel < grid[kbest].fuel) kbest = g;
      if (!(grid[kbest].fuel < kInf)) throw InfeasibleStagnation(
          "solve_direct: no feasible fixed-time subproblem in the bracket");
      Eval best = grid[kbest];

      double a = grid[std::max(kbest - 1, 0)].tf;
      double b2 = grid[std::min(kbest + 1, kGrid - 1)].tf;
      constexpr double kGold = 0.3819660112501051;  // 2 - golden ratio
      double x1 = a + kGold * (b2 - a), x2 = b2 - kGold * (b2 - a);
      Eval e1 = try_fixed(x1, best.z), e2 = try_fixed(x2, best.z);
      for (int it = 0; it < 40 && b2 - a > 1.5e-3; ++it) {
        if (e1.fuel <= e2.fuel) {
          b2 = x2;
          x2 = x1;
          e2 = e1;
          x1 = a + kGold * (b2 - a);
          e1 = try_fixed(x1, e2.fuel < kInf ? e2.z : best.z);
        } else {
          a = x1;
          x1 = x2;
          e1 = e2;
          x2 = b2 - kGold * (b2 - a);
          e2 = try_fixed(x2, e1.fuel < kInf ? e1.z : best.z);
        }
        const Eval& cand = e1.fuel <= e2.fuel ? e1 : e2;
        if (cand.fuel < best.fuel) best = cand;
      }
      const VectorXd z = best.z;
      sol.constraint_norm = constraint(z).norm();

      std::vector<Vec7> nodes;
      simulate(z, &nodes, nullptr);
      sol.t_f = z(nvar - 1);
      double integral = 0.0;
      for (int i = 0; i < N; ++i) {
        const Vec3 u = z.segment<3>(3 * i);
        sol.u.push_back(u);
        integral += u.norm();
      }
      sol.objective = prm.b * (sol.t_f / N) * integral;
      for (int i = 0; i <= N; ++i) {
        sol.t_grid.push_back(sol.t_f * i / N);
        sol.x.push_back(unpack7(nodes[i]));
      }
      sol.final_mass = sol.x.back().m;
      return sol;
    } catch (const std::exception&) {
      last_error = std::current_exception();
    }
  }
  std::rethrow_exception(last_error);
}

DirectSolution solve_onoff(const ModelParams& prm, const BoundaryConditions& bc,
                           const DirectOptions& opts, int M) {
  // unknown layout: [t_f, t_off, d_0 .. d_{M-1}]
  const int nvar = 2 + 3 * M;

  auto simulate = [&](const VectorXd& z, std::vector<Vec7>* nodes,
                      std::vector<double>* times) -> Vec7 {
    const double t_f = z(0), t_off = z(1);
    Vec7 y = pack7(RocketState{bc.r0, bc.v0, bc.m0});
    if (nodes) nodes->assign(1, y);
    if (times) times->assign(1, 0.0);
    const double dtb = t_off / M;
    for (int i = 0; i < M; ++i) {
      const Vec3 d = z.segment<3>(2 + 3 * i).normalized();
      y = rk4_step(y, d, dtb, prm, 0.0);
      if (nodes) nodes->push_back(y);
      if (times) times->push_back(dtb * (i + 1));
    }
    const double dtc = (t_f - t_off) / M;
    for (int i = 0; i < M; ++i) {
      y = rk4_step(y, Vec3::Zero(), dtc, prm, 0.0);
      if (nodes) nodes->push_back(y);
      if (times) times->push_back(t_off + dtc * (i + 1));
    }
    return y;
  };

  auto value_at = [&](const VectorXd& z, const Vec3& mu, double rho) {
    try {
      const Vec3 c = simulate(z, nullptr, nullptr).segment<3>(0) - Vec3(bc.rf);
      return z(1) + mu.dot(c) + 0.5 * rho * c.squaredNorm();
    } catch (const NonpositiveMass&) {
      return kInf;
    }
  };

  auto grad_at = [&](const VectorXd& z, const Vec3& mu, double rho) {
    VectorXd g(nvar);
    for (int i = 0; i < nvar; ++i) {
      const double h = 1e-7 * (1.0 + std::abs(z(i)));
      VectorXd zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      g(i) = (value_at(zp, mu, rho) - value_at(zm, mu, rho)) / (2.0 * h);
    }
    return g;
  };

  const Vec3 radial = bc.r0.normalized();
  auto project = [&](VectorXd z) {
    z(0) = std::clamp(z(0), opts.t_f_min, opts.t_f_max);
    z(1) = std::clamp(z(1), 1e-3, z(0) - 1e-3);
    for (int i = 0; i < M; ++i) {
      const double n = z.segment<3>(2 + 3 * i).norm();
      if (n > 1e-12)
        z.segment<3>(2 + 3 * i) /= n;
      else
        z.segment<3>(2 + 3 * i) = radial;
    }
    return z;
  };

  std::mt19937 rng(opts.rng_seed);
  std::uniform_real_distribution<double> pert(-0.2, 0.2);

  std::exception_ptr last_error;
  for (int seed = 0; seed < std::max(1, opts.seeds); ++seed) {
    VectorXd z0(nvar);
    z0(0) = opts.t_f_init;
    z0(1) = 0.25 * opts.t_f_init;
    for (int i = 0; i < M; ++i) z0.segment<3>(2 + 3 * i) = radial;
    if (seed > 0) {
      for (int i = 0; i < nvar; ++i) z0(i) += 0.2 * pert(rng);
    }
    try {
      DirectSolution sol;
      sol.seed_used = seed;
      auto inner = [&](const VectorXd& z, const Vec3& mu, double rho) {
        return spg(
            z, [&](const VectorXd& y) { return value_at(y, mu, rho); },
            [&](const VectorXd& y) { return grad_at(y, mu, rho); }, project,
            opts.max_inner, opts.step_tol, &sol.inner_iterations);
      };
      auto constraint = [&](const VectorXd& z) -> Vec3 {
        return simulate(z, nullptr, nullptr).segment<3>(0) - Vec3(bc.rf);
      };
      const VectorXd z =
          augmented_lagrangian(project(z0), opts, inner, constraint,
                               &sol.outer_iterations, &sol.constraint_norm);

      std::vector<Vec7> nodes;
      std::vector<double> times;
      simulate(z, &nodes, &times);
      sol.t_f = z(0);
      sol.t_off = z(1);
      sol.objective = prm.b * sol.t_off;
      sol.t_grid = times;
      for (const auto& y : nodes) sol.x.push_back(unpack7(y));
      for (int i = 0; i < M; ++i)
        sol.u.push_back(z.segment<3>(2 + 3 * i).normalized());
      for (int i = 0; i < M; ++i) sol.u.push_back(Vec3::Zero());
      sol.final_mass = sol.x.back().m;
      return sol;
    } catch (const std::exception&) {
      last_error = std::current_exception();
    }
  }
  std::rethrow_exception(last_error);
}

ControlProfile profile_from_direct(const DirectSolution& s) {
  ControlProfile p;
  p.t_f = s.t_f;
  p.objective = s.objective;
  // piecewise-constant control sampled at interval midpoints plus the ends
  const size_t n = s.u.size();
  for (size_t i = 0; i < n; ++i) {
    const double t0 = s.t_grid[i], t1 = s.t_grid[i + 1];
    const double un = s.u[i].norm();
    if (i == 0) {
      p.t.push_back(t0);
      p.u_norm.push_back(un);
    }
    p.t.push_back(0.5 * (t0 + t1));
    p.u_norm.push_back(un);
    if (i + 1 == n) {
      p.t.push_back(t1);
      p.u_norm.push_back(un);
    }
  }
  return p;
}

ComparisonReport compare(const ControlProfile& indirect,
                         const ControlProfile& direct_sol,
                         const ControlProfile& onoff, int grid_points) {
  validate_profile(indirect, "compare(indirect)");
  validate_profile(direct_sol, "compare(direct)");
  validate_profile(onoff, "compare(onoff)");
  ComparisonReport rep;
  rep.grid_points = grid_points;
  rep.obj_direct_minus_indirect = direct_sol.objective - indirect.objective;
  rep.obj_onoff_minus_indirect = onoff.objective - indirect.objective;
  rep.tf_direct_minus_indirect = direct_sol.t_f - indirect.t_f;
  rep.tf_onoff_minus_indirect = onoff.t_f - indirect.t_f;
  auto supdist = [&](const ControlProfile& a, const ControlProfile& b) {
    const double span = std::min(a.t_f, b.t_f);
    double sup = 0.0;
    for (int i = 0; i < grid_points; ++i) {
      const double t = span * i / (grid_points - 1);
      sup = std::max(sup, std::abs(interp_profile(a, t) - interp_profile(b, t)));
    }
    return sup;
  };
  rep.supnorm_direct_indirect = supdist(direct_sol, indirect);
  rep.supnorm_onoff_indirect = supdist(onoff, indirect);
  return rep;
}

bool check_three_phase(const ControlProfile& p) {
  validate_profile(p, "check_three_phase");
  const int n = 400;
  const double tf = p.t.back();
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = interp_profile(p, tf * i / (n - 1));

  // leading plateau near full thrust over the first 5% of the horizon
  double lead = 0.0;
  const int nl = n / 20;
  for (int i = 0; i < nl; ++i) lead += u[i];
  if (lead / nl < 0.9) return false;

  // trailing plateau near zero over the last 5%
  double tail = 0.0;
  for (int i = n - nl; i < n; ++i) tail += u[i];
  if (tail / nl > 0.1) return false;

  // interior plateau strictly inside (0.1, 0.9): longest contiguous run
  int run = 0, best = 0;
  for (int i = 0; i < n; ++i) {
    if (u[i] > 0.1 && u[i] < 0.9) {
      best = std::max(best, ++run);
    } else {
      run = 0;
    }
  }
  return best >= n / 5;
}

}  // namespace goddard::direct
