#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "goddard/odeint.hpp"

using goddard::odeint::IvpOptions;
using goddard::odeint::Method;
using Vec = Eigen::VectorXd;

namespace {

Vec scalar(double v) {
  Vec y(1);
  y(0) = v;
  return y;
}

const auto exp_rhs = [](double, const Vec& y) -> Vec { return y; };

}  // namespace

TEST_CASE("Euler on y' = y matches the closed form (1 + h)^N") {
  IvpOptions opt;
  opt.method = Method::Euler;
  opt.steps = 25;
  const auto res = goddard::odeint::integrate(exp_rhs, scalar(1.0), 0.0, 1.0, opt);
  CHECK(res.y_end(0) ==
        doctest::Approx(std::pow(1.0 + 1.0 / 25, 25)).epsilon(1e-14));
  CHECK(res.steps_taken == 25);
  // Fidelity floor for homotopy labeling: within 5% of e.
  CHECK(std::abs(res.y_end(0) - std::exp(1.0)) < 0.05 * std::exp(1.0));
}

TEST_CASE("RK4 exhibits fourth-order convergence") {
  IvpOptions opt;
  opt.method = Method::RK4;
  const double exact = std::exp(1.0);
  double prev_err = 0.0;
  for (int steps : {10, 20, 40, 80}) {
    opt.steps = steps;
    const auto res =
        goddard::odeint::integrate(exp_rhs, scalar(1.0), 0.0, 1.0, opt);
    const double err = std::abs(res.y_end(0) - exact);
    if (prev_err > 0.0) {
      const double order = std::log2(prev_err / err);
      CHECK(order > 3.8);
      CHECK(order < 4.2);
    }
    prev_err = err;
  }
}

TEST_CASE("adaptive pair hits the requested tolerance and rejects steps") {
  IvpOptions opt;
  opt.method = Method::AdaptiveRK;
  opt.abs_tol = 1e-10;
  opt.rel_tol = 1e-10;
  // Oscillator with known solution (cos t, -sin t).
  const auto rhs = [](double, const Vec& y) -> Vec {
    Vec d(2);
    d << y(1), -y(0);
    return d;
  };
  Vec y0(2);
  y0 << 1.0, 0.0;
  const auto res = goddard::odeint::integrate(rhs, y0, 0.0, 10.0, opt);
  CHECK(std::abs(res.y_end(0) - std::cos(10.0)) < 1e-7);
  CHECK(std::abs(res.y_end(1) + std::sin(10.0)) < 1e-7);
  CHECK(res.steps_taken > 10);

  // A crude tolerance takes far fewer steps.
  IvpOptions loose = opt;
  loose.abs_tol = loose.rel_tol = 1e-4;
  const auto res2 = goddard::odeint::integrate(rhs, y0, 0.0, 10.0, loose);
  CHECK(res2.steps_taken < res.steps_taken);
}

TEST_CASE("trace recording covers the whole span in order") {
  IvpOptions opt;
  opt.method = Method::AdaptiveRK;
  opt.record_trace = true;
  const auto res =
      goddard::odeint::integrate(exp_rhs, scalar(1.0), 0.0, 1.0, opt);
  REQUIRE(res.trace.size() >= 2);
  CHECK(res.trace.front().first == 0.0);
  CHECK(res.trace.back().first == doctest::Approx(1.0));
  for (size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].first > res.trace[i - 1].first);
  CHECK((res.trace.back().second - res.y_end).norm() == 0.0);
}

TEST_CASE("invalid span is rejected") {
  IvpOptions opt;
  CHECK_THROWS_AS(
      goddard::odeint::integrate(exp_rhs, scalar(1.0), 1.0, 1.0, opt),
      std::invalid_argument);
  CHECK_THROWS_AS(
      goddard::odeint::integrate(exp_rhs, scalar(1.0), 2.0, 1.0, opt),
      std::invalid_argument);
}

TEST_CASE("finite-time blow-up raises instead of returning garbage") {
  IvpOptions opt;
  opt.method = Method::AdaptiveRK;
  // y' = y^2, y(0) = 1 blows up at t = 1; the controller must give up.
  const auto rhs = [](double, const Vec& y) -> Vec {
    return Vec(y.array().square());
  };
  CHECK_THROWS(goddard::odeint::integrate(rhs, scalar(1.0), 0.0, 2.0, opt));
}

TEST_CASE("non-finite states are detected on fixed-step methods") {
  IvpOptions opt;
  opt.method = Method::Euler;
  opt.steps = 50;
  const auto rhs = [](double s, const Vec& y) -> Vec {
    return s > 0.5 ? scalar(std::numeric_limits<double>::quiet_NaN())
                   : scalar(y(0));
  };
  CHECK_THROWS_AS(goddard::odeint::integrate(rhs, scalar(1.0), 0.0, 1.0, opt),
                  goddard::odeint::NonFiniteRhs);
}

TEST_CASE("arc sequences are continuous at the junctions") {
  IvpOptions opt;
  opt.method = Method::RK4;
  opt.steps = 50;
  using Rhs = std::function<Vec(double, const Vec&)>;
  std::vector<std::pair<Rhs, std::pair<double, double>>> arcs;
  arcs.emplace_back(Rhs(exp_rhs), std::pair(0.0, 0.5));
  arcs.emplace_back(Rhs([](double, const Vec& y) -> Vec { return 2 * y; }),
                    std::pair(0.5, 1.0));
  const auto res =
      goddard::odeint::integrate_arc_sequence(arcs, scalar(1.0), opt);
  REQUIRE(res.size() == 2);
  // exp(0.5) then growth factor exp(2 * 0.5).
  CHECK(res[0].y_end(0) == doctest::Approx(std::exp(0.5)).epsilon(1e-8));
  CHECK(res[1].y_end(0) ==
        doctest::Approx(std::exp(0.5) * std::exp(1.0)).epsilon(1e-8));
}
