#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "goddard/direct.hpp"

using namespace goddard;
using direct::ControlProfile;

namespace {

ControlProfile three_phase_profile() {
  ControlProfile p;
  p.t_f = 0.22;
  for (int i = 0; i <= 100; ++i) {
    const double s = i / 100.0;
    p.t.push_back(s * p.t_f);
    p.u_norm.push_back(s < 0.1 ? 1.0 : (s < 0.4 ? 0.55 : 0.0));
  }
  return p;
}

}  // namespace

TEST_CASE("check_three_phase accepts the canonical shape") {
  CHECK(direct::check_three_phase(three_phase_profile()));
}

TEST_CASE("check_three_phase rejects degenerate shapes") {
  // Constant full thrust: no trailing coast, no interior plateau.
  ControlProfile full;
  full.t_f = 0.2;
  for (int i = 0; i <= 50; ++i) {
    full.t.push_back(0.2 * i / 50.0);
    full.u_norm.push_back(1.0);
  }
  CHECK_FALSE(direct::check_three_phase(full));

  // Pure on-off: leading and trailing plateaus but nothing in between.
  ControlProfile onoff;
  onoff.t_f = 0.2;
  for (int i = 0; i <= 100; ++i) {
    onoff.t.push_back(0.2 * i / 100.0);
    onoff.u_norm.push_back(i <= 27 ? 1.0 : 0.0);
  }
  CHECK_FALSE(direct::check_three_phase(onoff));

  // Interior level too close to the bang values.
  ControlProfile nearbang = three_phase_profile();
  for (auto& u : nearbang.u_norm)
    if (u == 0.55) u = 0.95;
  CHECK_FALSE(direct::check_three_phase(nearbang));
}

TEST_CASE("malformed profiles raise GridMismatch") {
  ControlProfile bad;
  bad.t = {0.0, 0.1};
  bad.u_norm = {1.0};
  CHECK_THROWS_AS(direct::check_three_phase(bad), direct::GridMismatch);
  const ControlProfile ok = three_phase_profile();
  CHECK_THROWS_AS(direct::compare(ok, bad, ok), direct::GridMismatch);
}

TEST_CASE("compare reports deltas and profile distances") {
  const ControlProfile a = three_phase_profile();
  ControlProfile b = a;
  b.objective = a.objective + 0.01;
  b.t_f = a.t_f + 0.005;
  // Shift the interior plateau level by 0.1.
  for (auto& u : b.u_norm)
    if (u == 0.55) u = 0.65;
  const direct::ComparisonReport rep = direct::compare(a, b, a, 200);
  CHECK(rep.grid_points == 200);
  CHECK(rep.obj_direct_minus_indirect == doctest::Approx(0.01));
  CHECK(rep.tf_direct_minus_indirect == doctest::Approx(0.005));
  CHECK(rep.supnorm_direct_indirect >= 0.1 - 1e-9);
  CHECK(rep.supnorm_onoff_indirect == doctest::Approx(0.0));
}

TEST_CASE("profile_from_direct samples node controls") {
  direct::DirectSolution s;
  s.t_f = 0.2;
  for (int i = 0; i <= 4; ++i) s.t_grid.push_back(0.05 * i);
  s.u = {Vec3(1, 0, 0), Vec3(0, 0.5, 0), Vec3(0, 0, 0.25), Vec3::Zero()};
  const ControlProfile p = direct::profile_from_direct(s);
  REQUIRE(p.t.size() == p.u_norm.size());
  REQUIRE(p.t.size() >= 4);
  CHECK(p.t_f == doctest::Approx(0.2));
  CHECK(p.u_norm.front() == doctest::Approx(1.0));
  CHECK(p.u_norm.back() == doctest::Approx(0.0));
}

TEST_CASE("on-off comparator: feasibility and reference values") {
  ModelParams prm;
  BoundaryConditions bc;
  direct::DirectOptions opts;
  const direct::DirectSolution s = direct::solve_onoff(prm, bc, opts, 20);
  CHECK(s.constraint_norm <= 1e-6);
  CHECK(s.objective == doctest::Approx(0.4061).epsilon(0.0125));
  CHECK(s.t_off == doctest::Approx(0.0580).epsilon(0.09));
  CHECK(s.objective == doctest::Approx(prm.b * s.t_off).epsilon(1e-9));
  CHECK(s.t_off < s.t_f);
  // Burn-phase controls are unit vectors; coast controls vanish.
  bool coast_seen = false;
  for (size_t i = 0; i < s.u.size(); ++i) {
    const double n = s.u[i].norm();
    CHECK((std::abs(n - 1.0) < 1e-9 || n == 0.0));
    coast_seen = coast_seen || n == 0.0;
  }
  CHECK(coast_seen);
  // An on-off profile must fail the three-phase (singular) shape test.
  CHECK_FALSE(direct::check_three_phase(direct::profile_from_direct(s)));
}

TEST_CASE("transcription: feasibility, consistency and mesh refinement") {
  ModelParams prm;
  BoundaryConditions bc;
  direct::DirectOptions opts;

  const direct::DirectSolution s50 = direct::solve_direct(50, prm, bc, opts);
  const direct::DirectSolution s100 = direct::solve_direct(100, prm, bc, opts);

  for (const auto& s : {s50, s100}) {
    CHECK(s.constraint_norm <= 1e-6);
    CHECK(s.t_f > 0.15);
    CHECK(s.t_f < 0.3);
    REQUIRE(s.u.size() + 1 == s.x.size());
    REQUIRE(s.t_grid.size() == s.x.size());
    for (size_t i = 1; i < s.t_grid.size(); ++i)
      CHECK(s.t_grid[i] > s.t_grid[i - 1]);
    double integral = 0.0;
    for (const auto& u : s.u) {
      CHECK(u.norm() <= 1.0 + 1e-9);
      integral += u.norm();
    }
    const int N = static_cast<int>(s.u.size());
    CHECK(s.objective ==
          doctest::Approx(prm.b * (s.t_f / N) * integral).epsilon(1e-9));
    // Fuel bookkeeping: consumed mass matches the propagated final mass
    // up to the |u| smoothing in the dynamics.
    CHECK(s.final_mass ==
          doctest::Approx(bc.m0 - s.objective).epsilon(1e-3));
    CHECK(direct::check_three_phase(direct::profile_from_direct(s)));
  }

  // Doubling the mesh moves the objective by less than 0.5%.
  CHECK(std::abs(s100.objective - s50.objective) < 0.005 * s100.objective);
}
