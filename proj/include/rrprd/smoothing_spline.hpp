#pragma once

#include "rrprd/curve.hpp"

#include <span>

namespace rrprd {

// Cubic smoothing spline with a residual budget:
//
//   minimize  integral s''(t)^2 dt
//   subject to sum_i w_i (y_i - s(t_i))^2 <= budget
//
// Solved through the penalized form sum_i w_i (y_i - s(t_i))^2 + alpha * integral s''^2
// (Reinsch), with alpha tuned by bisection on log(alpha) until the budget is
// active. When the weighted straight-line fit already meets the budget the
// line is returned (interior optimum, budget inactive).
struct SmoothingSplineResult {
  CubicSpline spline;
  double alpha = 0.0;          // trade-off parameter at the solution; +inf for the line
  double residual = 0.0;       // sum_i w_i (y_i - s(t_i))^2
  double budget = 0.0;
  bool budget_active = false;
  bool feasible = true;        // false when even interpolation exceeds the budget
};

SmoothingSplineResult fit_smoothing_spline(std::span<const double> t, std::span<const double> y,
                                           std::span<const double> w, double budget);

// Penalized fit for a fixed alpha >= 0 (alpha = 0 interpolates the weighted
// knot means). Exposed for tests of the regularization path.
SmoothingSplineResult smoothing_spline_for_alpha(std::span<const double> t, std::span<const double> y,
                                                 std::span<const double> w, double alpha);

}  // namespace rrprd
