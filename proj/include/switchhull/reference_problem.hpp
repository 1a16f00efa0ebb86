#pragma once

// Single heat source on the unit square, target temperature pulsing with
// max(cos 2 pi t, 0).

#include <cmath>
#include <memory>
#include <numbers>

#include "switchhull/fem_heat.hpp"

namespace switchhull {

/// psi(x) = 12 pi^2 exp(x1 + x2) sin(pi x1) sin(pi x2)
inline double reference_form_function(double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  return 12.0 * pi * pi * std::exp(x1 + x2) * std::sin(pi * x1) * std::sin(pi * x2);
}

/// y_d(t, x) = 2 pi^2 max(cos 2 pi t, 0) sin(pi x1) sin(pi x2)
inline double reference_desired_state(double t, double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  return 2.0 * pi * pi * std::max(std::cos(2.0 * pi * t), 0.0) * std::sin(pi * x1) * std::sin(pi * x2);
}

struct ReferenceProblemOptions {
  double horizon = 2.0;
  int sigma_max = 2;
  double tikhonov = 0.0;
  bool leading_zero = true;
  ScalarField initial;  // empty means y0 = 0
};

inline std::shared_ptr<const HeatControlProblem> make_reference_problem(const ReferenceProblemOptions& opt = {}) {
  auto p = std::make_shared<HeatControlProblem>();
  p->horizon = opt.horizon;
  p->forms = {reference_form_function};
  p->desired = reference_desired_state;
  p->initial = opt.initial;
  p->tikhonov = opt.tikhonov;
  p->constraint = BoundedSwitchings::full_cube(1, opt.sigma_max, opt.leading_zero);
  return p;
}

}  // namespace switchhull
