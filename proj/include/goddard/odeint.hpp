#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace goddard::odeint {

struct StepSizeUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteRhs : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { Euler, RK4, AdaptiveRK };

/// Three fidelity levels: rough fixed-step Euler for homotopy labeling,
/// fixed-step RK4 for transcription, and an embedded Dormand-Prince 5(4)
/// pair with per-step error control for the final shooting.
struct IvpOptions {
  Method method = Method::AdaptiveRK;
  int steps = 100;          // fixed-step methods
  double abs_tol = 1e-8;    // adaptive
  double rel_tol = 1e-8;
  bool record_trace = false;
};

template <class Vec>
struct IvpResult {
  Vec y_end;
  std::vector<std::pair<double, Vec>> trace;  // filled when record_trace
  long steps_taken = 0;
  long rejected_steps = 0;
};

namespace detail {

template <class Vec>
void check_finite(const Vec& y) {
  if (!y.allFinite()) throw NonFiniteRhs("non-finite state during integration");
}

}  // namespace detail

template <class Vec, class Rhs>
IvpResult<Vec> integrate(Rhs&& rhs, Vec y, double s0, double s1,
                         const IvpOptions& opt) {
  if (!(s0 < s1)) throw std::invalid_argument("integrate: span must increase");
  IvpResult<Vec> out;
  if (opt.record_trace) out.trace.emplace_back(s0, y);

  if (opt.method == Method::Euler) {
    const double h = (s1 - s0) / opt.steps;
    double s = s0;
    for (int i = 0; i < opt.steps; ++i) {
      y += h * rhs(s, y);
      s = s0 + (i + 1) * h;
      ++out.steps_taken;
      if (opt.record_trace) out.trace.emplace_back(s, y);
    }
    detail::check_finite(y);
    out.y_end = std::move(y);
    return out;
  }

  if (opt.method == Method::RK4) {
    const double h = (s1 - s0) / opt.steps;
    double s = s0;
    for (int i = 0; i < opt.steps; ++i) {
      const Vec k1 = rhs(s, y);
      const Vec k2 = rhs(s + h / 2, Vec(y + h / 2 * k1));
      const Vec k3 = rhs(s + h / 2, Vec(y + h / 2 * k2));
      const Vec k4 = rhs(s + h, Vec(y + h * k3));
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      s = s0 + (i + 1) * h;
      ++out.steps_taken;
      if (opt.record_trace) out.trace.emplace_back(s, y);
    }
    detail::check_finite(y);
    out.y_end = std::move(y);
    return out;
  }

  // Dormand-Prince 5(4) embedded pair.
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double span = s1 - s0;
  double s = s0;
  double h = span / 100.0;
  Vec k1 = rhs(s, y);
  while (s < s1) {
    if (s + h > s1) h = s1 - s;
    if (h < 1e-14 * span)
      throw StepSizeUnderflow("adaptive step underflow");
    const Vec k2 = rhs(s + c2 * h, Vec(y + h * (a21 * k1)));
    const Vec k3 = rhs(s + c3 * h, Vec(y + h * (a31 * k1 + a32 * k2)));
    const Vec k4 = rhs(s + c4 * h, Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vec k5 = rhs(s + c5 * h,
                       Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vec k6 = rhs(
        s + h,
        Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Vec ynew =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = rhs(s + h, ynew);
    const Vec err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double errnorm = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      errnorm = std::max(errnorm, std::abs(err(i)) / sc);
    }
    if (!std::isfinite(errnorm)) throw NonFiniteRhs("non-finite error estimate");

    if (errnorm <= 1.0) {
      s += h;
      y = ynew;
      k1 = k7;  // FSAL
      ++out.steps_taken;
      if (opt.record_trace) out.trace.emplace_back(s, y);
    } else {
      ++out.rejected_steps;
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(errnorm, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
  }
  detail::check_finite(y);
  out.y_end = std::move(y);
  return out;
}

/// Contiguous arcs integrated sequentially; state continuity at the
/// junctions holds by construction.
template <class Vec, class Rhs>
std::vector<IvpResult<Vec>> integrate_arc_sequence(
    const std::vector<std::pair<Rhs, std::pair<double, double>>>& arcs, Vec y0,
    const IvpOptions& opt) {
  std::vector<IvpResult<Vec>> results;
  Vec y = std::move(y0);
  for (const auto& [rhs, span] : arcs) {
    results.push_back(integrate(rhs, y, span.first, span.second, opt));
    y = results.back().y_end;
  }
  return results;
}

}  // namespace goddard::odeint
