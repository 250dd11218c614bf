#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "goddard/model.hpp"

using namespace goddard;

namespace {

double fd_drag_dir(const Vec3& r, const Vec3& v, const ModelParams& p, int i,
                   bool wrt_r, double h = 1e-6) {
  Vec3 rp = r, rm = r, vp = v, vm = v;
  if (wrt_r) {
    rp(i) += h;
    rm(i) -= h;
  } else {
    vp(i) += h;
    vm(i) -= h;
  }
  return (drag(rp, vp, p) - drag(rm, vm, p)) / (2 * h);
}

}  // namespace

TEST_CASE("drag closed-form values") {
  ModelParams p;
  const Vec3 r(1, 0, 0), v(0.1, 0, 0);
  CHECK(drag(r, v, p) == doctest::Approx(3.1).epsilon(1e-12));
  CHECK(drag(r, Vec3::Zero(), p) == 0.0);
  ModelParams off = p;
  off.theta = 0.0;
  CHECK(drag(r, v, off) == 0.0);
  CHECK(drag(Vec3(1.004, 0, 0), v, p) ==
        doctest::Approx(3.1 * std::exp(-500 * 0.004)).epsilon(1e-10));
}

TEST_CASE("drag_partials analytic point and edge cases") {
  ModelParams p;
  const Vec3 r(1, 0, 0), v(0.1, 0, 0);
  const DragPartials d = drag_partials(r, v, p);
  CHECK(d.dD_dr(0) == doctest::Approx(-1550.0).epsilon(1e-10));
  CHECK(d.dD_dr(1) == doctest::Approx(0.0));
  CHECK(d.dD_dv(0) == doctest::Approx(62.0).epsilon(1e-10));
  CHECK(d.dD_dm == 0.0);

  const DragPartials at_rest = drag_partials(r, Vec3::Zero(), p);
  CHECK(at_rest.dD_dv.norm() == 0.0);

  ModelParams off = p;
  off.theta = 0.0;
  const DragPartials vac = drag_partials(r, v, off);
  CHECK(vac.dD_dr.norm() == 0.0);
  CHECK(vac.dD_dv.norm() == 0.0);
}

TEST_CASE("drag_partials match finite differences over random points") {
  ModelParams p;
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> rmag(0.99, 1.02), vmag(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 r{gauss(rng), gauss(rng), gauss(rng)};
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    r *= rmag(rng) / r.norm();
    v *= vmag(rng) / v.norm();
    const DragPartials d = drag_partials(r, v, p);
    const double scale = std::max(1.0, d.dD_dr.norm() + d.dD_dv.norm());
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(d.dD_dr(i) - fd_drag_dir(r, v, p, i, true)) <
            1e-5 * scale);
      CHECK(std::abs(d.dD_dv(i) - fd_drag_dir(r, v, p, i, false)) <
            1e-5 * scale);
    }
  }
}

TEST_CASE("gravity direction and magnitude") {
  ModelParams p;
  CHECK((gravity(Vec3(1, 0, 0), p) - Vec3(1, 0, 0)).norm() < 1e-14);
  CHECK((gravity(Vec3(2, 0, 0), p) - Vec3(0.25, 0, 0)).norm() < 1e-14);
  CHECK((gravity(Vec3(0, 1, 0), p) - Vec3(0, 1, 0)).norm() < 1e-14);
}

TEST_CASE("gravity_jacobian: frozen point, symmetry, harmonicity, FD") {
  ModelParams p;
  const Mat3 J = gravity_jacobian(Vec3(1, 0, 0), p);
  CHECK((J - Vec3(-2, 1, 1).asDiagonal().toDenseMatrix()).norm() < 1e-12);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> rmag(0.5, 2.0);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 r{gauss(rng), gauss(rng), gauss(rng)};
    r *= rmag(rng) / r.norm();
    const Mat3 G = gravity_jacobian(r, p);
    CHECK((G - G.transpose()).norm() < 1e-12);
    CHECK(std::abs(G.trace()) < 1e-10);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      Vec3 rp = r, rm = r;
      rp(i) += h;
      rm(i) -= h;
      const Vec3 col = (gravity(rp, p) - gravity(rm, p)) / (2 * h);
      CHECK((G.col(i) - col).norm() < 1e-6);
    }
  }
}

TEST_CASE("drag sign and radial monotonicity") {
  ModelParams p;
  std::mt19937 rng(13);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> rmag(0.99, 1.02), vmag(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 r{gauss(rng), gauss(rng), gauss(rng)};
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    r *= rmag(rng) / r.norm();
    v *= vmag(rng) / v.norm();
    const double d = drag(r, v, p);
    CHECK(d >= 0.0);
    CHECK(drag(Vec3(1.001 * r), v, p) < d);
  }
}

TEST_CASE("state_rhs closed-form points and drag convention at v=0") {
  ModelParams p;
  RocketState x{Vec3(1, 0, 0), Vec3(0.1, 0, 0), 1.0};
  const StateDerivative coast = state_rhs(x, Control{}, p);
  CHECK((coast.rdot - x.v).norm() < 1e-14);
  CHECK(coast.vdot(0) == doctest::Approx(-4.1).epsilon(1e-12));
  CHECK(coast.mdot == 0.0);

  const StateDerivative burn = state_rhs(x, Control{Vec3(1, 0, 0)}, p);
  CHECK(burn.vdot(0) == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(burn.mdot == doctest::Approx(-7.0));

  RocketState rest = x;
  rest.v = Vec3::Zero();
  const StateDerivative launch = state_rhs(rest, Control{}, p);
  CHECK((launch.vdot + gravity(rest.r, p)).norm() < 1e-14);
  CHECK(launch.mdot == 0.0);
}

TEST_CASE("state_rhs rejects nonpositive mass and never adds mass") {
  ModelParams p;
  RocketState x{Vec3(1, 0, 0), Vec3(0.1, 0, 0), 0.0};
  CHECK_THROWS_AS(state_rhs(x, Control{}, p), NonpositiveMass);
  x.m = -0.5;
  CHECK_THROWS_AS(state_rhs(x, Control{}, p), NonpositiveMass);

  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    RocketState y{Vec3(1 + 0.01 * gauss(rng), 0.01 * gauss(rng),
                       0.01 * gauss(rng)),
                  Vec3(0.1 * gauss(rng), 0.1 * gauss(rng), 0.1 * gauss(rng)),
                  0.1 + std::abs(gauss(rng))};
    Vec3 u{gauss(rng), gauss(rng), gauss(rng)};
    if (u.norm() > 1.0) u /= u.norm();
    CHECK(state_rhs(y, Control{u}, p).mdot <= 0.0);
  }
}

TEST_CASE("state_rhs_jacobians match finite differences") {
  ModelParams p;
  const double eps = 1e-4;
  RocketState x{Vec3(1.002, 0.001, 0.01), Vec3(0.05, 0.01, 0.2), 0.8};
  const Control u{Vec3(0.3, 0.1, 0.5)};
  const StateJacobians J = state_rhs_jacobians(x, u, p, eps);

  auto pack = [](const RocketState& s) {
    Eigen::Matrix<double, 7, 1> y;
    y << s.r, s.v, s.m;
    return y;
  };
  auto rhs7 = [&](const Eigen::Matrix<double, 7, 1>& y, const Vec3& uu) {
    RocketState s{y.segment<3>(0), y.segment<3>(3), y(6)};
    const StateDerivative d = state_rhs(s, Control{uu}, p);
    Eigen::Matrix<double, 7, 1> out;
    // The Jacobians smooth the mass-flow row as -b*sqrt(|u|^2+eps^2).
    out << d.rdot, d.vdot, -p.b * std::sqrt(uu.squaredNorm() + eps * eps);
    return out;
  };
  const Eigen::Matrix<double, 7, 1> y0 = pack(x);
  const double h = 1e-7;
  for (int i = 0; i < 7; ++i) {
    Eigen::Matrix<double, 7, 1> yp = y0, ym = y0;
    yp(i) += h;
    ym(i) -= h;
    const Eigen::Matrix<double, 7, 1> col =
        (rhs7(yp, u.u) - rhs7(ym, u.u)) / (2 * h);
    CHECK((J.dfdx.col(i) - col).norm() < 1e-5 * (1 + col.norm()));
  }
  for (int i = 0; i < 3; ++i) {
    Vec3 up = u.u, um = u.u;
    up(i) += h;
    um(i) -= h;
    const Eigen::Matrix<double, 7, 1> col =
        (rhs7(y0, up) - rhs7(y0, um)) / (2 * h);
    CHECK((J.dfdu.col(i) - col).norm() < 1e-5 * (1 + col.norm()));
  }
}
