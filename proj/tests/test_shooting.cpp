#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "goddard/shooting.hpp"

using namespace goddard;
using Eigen::VectorXd;

namespace {

VectorXd scalar(double v) {
  VectorXd z(1);
  z(0) = v;
  return z;
}

}  // namespace

TEST_CASE("newton_solve: quadratic phase on z^2 - 4") {
  // Log every evaluation and keep the subsequence of accepted iterates
  // (each cuts the residual by far more than the FD/line-search probes).
  std::vector<double> iterates;
  double last_kept = 1e300;
  auto F = [&](const VectorXd& z) {
    VectorXd r(1);
    r(0) = z(0) * z(0) - 4.0;
    if (std::abs(r(0)) < 0.5 * last_kept) {
      last_kept = std::abs(r(0));
      iterates.push_back(z(0));
    }
    return r;
  };
  NewtonOptions opts;
  opts.tol = 1e-12;
  NewtonDiagnostics diag;
  const VectorXd z = newton_solve(F, scalar(3.0), opts, &diag);
  CHECK(std::abs(z(0) - 2.0) < 1e-10);
  CHECK(diag.residual_norm < 1e-12);
  CHECK(diag.iterations <= 10);

  // e_{k+1} <= C e_k^2 once inside the quadratic basin.
  int checked = 0;
  for (size_t k = 0; k + 1 < iterates.size(); ++k) {
    const double e0 = std::abs(iterates[k] - 2.0);
    const double e1 = std::abs(iterates[k + 1] - 2.0);
    if (e0 < 0.1 && e0 > 1e-8) {
      CHECK(e1 <= 1.0 * e0 * e0);
      ++checked;
    }
  }
  CHECK(checked >= 1);
}

TEST_CASE("newton_solve failure modes") {
  NewtonOptions opts;
  opts.tol = 1e-12;
  // No real root: the residual cannot reach the tolerance.
  auto no_root = [](const VectorXd& z) {
    VectorXd r(1);
    r(0) = z(0) * z(0) + 1.0;
    return r;
  };
  CHECK_THROWS(newton_solve(no_root, scalar(3.0), opts));

  // Iteration budget too small.
  auto parab = [](const VectorXd& z) {
    VectorXd r(1);
    r(0) = z(0) * z(0) - 4.0;
    return r;
  };
  NewtonOptions one = opts;
  one.max_iter = 1;
  CHECK_THROWS_AS(newton_solve(parab, scalar(10.0), one),
                  MaxIterationsExceeded);

  // Identically-zero Jacobian.
  auto flat = [](const VectorXd& z) {
    VectorXd r(1);
    r(0) = 1.0;
    return r;
  };
  CHECK_THROWS_AS(newton_solve(flat, scalar(0.0), opts), SingularJacobian);

  // Dimension mismatch between unknowns and residual.
  auto rect = [](const VectorXd&) { return VectorXd::Zero(2); };
  CHECK_THROWS_AS(newton_solve(rect, scalar(0.0), opts),
                  std::invalid_argument);
}

TEST_CASE("newton_solve on a 2-d system with condition estimate") {
  auto F = [](const VectorXd& z) {
    VectorXd r(2);
    r(0) = z(0) * z(0) + z(1) - 3.0;
    r(1) = z(1) * z(1) * z(1) - 1.0;
    return r;
  };
  NewtonOptions opts;
  opts.tol = 1e-10;
  NewtonDiagnostics diag;
  VectorXd z0(2);
  z0 << 2.0, 2.0;
  const VectorXd z = newton_solve(F, z0, opts, &diag);
  CHECK(std::abs(z(1) - 1.0) < 1e-8);
  CHECK(std::abs(z(0) - std::sqrt(2.0)) < 1e-8);
  CHECK(diag.condition_estimate >= 1.0);
}

TEST_CASE("arc structure validity and unknown dimensions") {
  ArcStructure plain;
  CHECK(plain.valid());
  CHECK(plain.unknown_dim() == 8);
  CHECK(plain.n_switch() == 0);

  ArcStructure three;
  three.arcs = {ControlMode::MaxThrust, ControlMode::Singular,
                ControlMode::NullThrust};
  CHECK(three.valid());
  CHECK(three.unknown_dim() == 10);
  CHECK(three.n_switch() == 2);

  // A switch without a singular arc has no matching residual equation.
  ArcStructure bangbang;
  bangbang.arcs = {ControlMode::MaxThrust, ControlMode::NullThrust};
  CHECK_FALSE(bangbang.valid());

  ArcStructure empty;
  empty.arcs = {};
  CHECK_FALSE(empty.valid());

  // Property: valid iff every switching time is paired with half a
  // singular-arc condition set.
  std::mt19937 rng(61);
  std::uniform_int_distribution<int> len(1, 6), mode(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    ArcStructure s;
    s.arcs.clear();
    int singular = 0;
    const int L = len(rng);
    for (int i = 0; i < L; ++i) {
      const auto m = static_cast<ControlMode>(mode(rng));
      if (m == ControlMode::Singular) ++singular;
      s.arcs.push_back(m);
    }
    CHECK(s.valid() == (2 * singular == L - 1));
    CHECK(s.unknown_dim() == 8 + L - 1);
  }
}

TEST_CASE("shooting unknowns pack/unpack round-trip") {
  ShootingUnknowns u;
  u.p_r0 = Vec3(1, -2, 3);
  u.p_v0 = Vec3(0.5, 0.25, -0.125);
  u.p_m0 = -0.7;
  u.t_f = 0.21;
  u.t_switch = {0.1, 0.4};
  const ShootingUnknowns back = ShootingUnknowns::unpack(u.pack());
  CHECK((back.pack() - u.pack()).norm() == 0.0);
  CHECK(back.t_switch.size() == 2);
}

TEST_CASE("shooting_residual input validation") {
  ModelParams prm;
  BoundaryConditions bc;
  ArcStructure s;
  odeint::IvpOptions integ;
  integ.method = odeint::Method::Euler;
  integ.steps = 25;

  VectorXd bad_dim = VectorXd::Zero(5);
  CHECK_THROWS_AS(shooting_residual(bad_dim, s, CostConvention::MinFuel, prm,
                                    bc, integ),
                  InvalidUnknowns);

  VectorXd neg_tf = VectorXd::Constant(8, 0.1);
  neg_tf(7) = -0.2;
  CHECK_THROWS_AS(shooting_residual(neg_tf, s, CostConvention::MinFuel, prm,
                                    bc, integ),
                  InvalidUnknowns);

  ArcStructure three;
  three.arcs = {ControlMode::MaxThrust, ControlMode::Singular,
                ControlMode::NullThrust};
  VectorXd unordered = VectorXd::Constant(10, 0.1);
  unordered(7) = 0.2;
  unordered(8) = 0.5;
  unordered(9) = 0.3;  // s_2 < s_1
  CHECK_THROWS_AS(shooting_residual(unordered, three, CostConvention::MinFuel,
                                    prm, bc, integ),
                  InvalidUnknowns);
}

TEST_CASE("degenerate initial costates are refused") {
  ModelParams prm;
  BoundaryConditions bc;
  ArcStructure s;
  odeint::IvpOptions integ;
  integ.method = odeint::Method::Euler;
  integ.steps = 25;
  VectorXd z = VectorXd::Zero(8);
  z(6) = 0.3;  // p_m0 only; p_r0 = p_v0 = 0
  z(7) = 0.2;
  CHECK_THROWS_AS(shooting_residual(z, s, CostConvention::MinFuel, prm, bc,
                                    integ),
                  DegenerateExtremal);
}

TEST_CASE("vacuum regularized solve converges and fills the solution") {
  ModelParams prm;
  prm.theta = 0.0;
  prm.lambda = 0.0;
  BoundaryConditions bc;
  ArcStructure s;  // single regularized arc
  odeint::IvpOptions integ;
  integ.method = odeint::Method::Euler;
  integ.steps = 25;
  NewtonOptions nopts;
  nopts.tol = 1e-10;
  VectorXd z0(8);
  z0 << 0.1, 0.1, 0.1, 0.4, 0.4, 0.4, 0.0, 0.1;
  const Solution sol = solve_indirect(s, CostConvention::MinFuel, prm, bc, z0,
                                      nopts, integ);
  CHECK(sol.newton_diag.residual_norm < 1e-10);
  CHECK(sol.t_f > 0.1);
  CHECK(sol.t_f < 0.5);
  CHECK(sol.final_mass < bc.m0);
  CHECK(sol.final_mass > 0.0);
  CHECK(sol.objective ==
        doctest::Approx(bc.m0 - sol.final_mass).epsilon(1e-12));
  CHECK(sol.switch_times_physical.empty());
  CHECK(sol.trace.size() > 10);
  CHECK_FALSE(sol.residual_diag.structure_violation);
  // Terminal transversality from the trace: p_v(1) ~ 0, p_m(1) ~ 0.
  const TracePoint& last = sol.trace.back();
  CHECK(last.e.p.p_v.norm() < 1e-6);
  CHECK(std::abs(last.e.p.p_m) < 1e-6);
}
