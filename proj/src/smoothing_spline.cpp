#include "rrprd/smoothing_spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rrprd {

namespace {

// Data collapsed onto distinct abscissae: weight sums and weighted means. The
// within-knot scatter is a constant offset of every residual.
struct Knots {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> y;
  double scatter = 0.0;
};

Knots collapse(std::span<const double> t, std::span<const double> y, std::span<const double> w) {
  const std::size_t m = t.size();
  if (m == 0) throw std::invalid_argument("smoothing spline: no data");
  if (y.size() != m || w.size() != m) throw std::invalid_argument("smoothing spline: size mismatch");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });

  Knots k;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    double ws = 0.0;
    double wy = 0.0;
    while (j < m && t[order[j]] == t[order[i]]) {
      const double wi = w[order[j]];
      if (!(wi > 0.0) || !std::isfinite(wi)) throw std::invalid_argument("smoothing spline: weights must be positive");
      ws += wi;
      wy += wi * y[order[j]];
      ++j;
    }
    const double mean = wy / ws;
    for (std::size_t r = i; r < j; ++r) {
      const double d = y[order[r]] - mean;
      k.scatter += w[order[r]] * d * d;
    }
    k.x.push_back(t[order[i]]);
    k.w.push_back(ws);
    k.y.push_back(mean);
    i = j;
  }
  return k;
}

double residual_of(const Knots& k, const std::vector<double>& fitted) {
  double acc = k.scatter;
  for (std::size_t i = 0; i < k.x.size(); ++i) {
    const double d = k.y[i] - fitted[i];
    acc += k.w[i] * d * d;
  }
  return acc;
}

SmoothingSplineResult straight_line(const Knots& k) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k.x.size(); ++i) {
    sw += k.w[i];
    sx += k.w[i] * k.x[i];
    sy += k.w[i] * k.y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k.x.size(); ++i) {
    sxx += k.w[i] * (k.x[i] - mx) * (k.x[i] - mx);
    sxy += k.w[i] * (k.x[i] - mx) * (k.y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  std::vector<double> fitted(k.x.size());
  for (std::size_t i = 0; i < k.x.size(); ++i) fitted[i] = my + slope * (k.x[i] - mx);
  SmoothingSplineResult r;
  r.residual = residual_of(k, fitted);
  r.alpha = std::numeric_limits<double>::infinity();
  r.spline = CubicSpline(k.x, std::move(fitted), std::vector<double>(k.x.size(), 0.0));
  return r;
}

// Reinsch: (R + alpha Q^T W^{-1} Q) gamma = Q^T y, fitted = y - alpha W^{-1} Q gamma.
SmoothingSplineResult reinsch(const Knots& k, double alpha) {
  const std::size_t n = k.x.size();
  if (n < 3) {
    if (alpha == 0.0 && n == 2) {
      SmoothingSplineResult r;
      r.spline = CubicSpline(k.x, k.y, {0.0, 0.0});
      r.residual = k.scatter;
      return r;
    }
    auto r = straight_line(k);
    r.alpha = alpha;
    return r;
  }
  const std::size_t m = n - 2;
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = k.x[i + 1] - k.x[i];
  // Column a of Q has entries q0, q1, q2 at rows a, a+1, a+2.
  std::vector<double> q0(m), q1(m), q2(m);
  for (std::size_t a = 0; a < m; ++a) {
    q0[a] = 1.0 / h[a];
    q1[a] = -1.0 / h[a] - 1.0 / h[a + 1];
    q2[a] = 1.0 / h[a + 1];
  }
  std::vector<double> dinv(n);
  for (std::size_t i = 0; i < n; ++i) dinv[i] = 1.0 / k.w[i];

  std::vector<double> d0(m), d1(m, 0.0), d2(m, 0.0), rhs(m);
  for (std::size_t a = 0; a < m; ++a) {
    d0[a] = (h[a] + h[a + 1]) / 3.0 +
            alpha * (q0[a] * q0[a] * dinv[a] + q1[a] * q1[a] * dinv[a + 1] + q2[a] * q2[a] * dinv[a + 2]);
    if (a + 1 < m) {
      d1[a] = h[a + 1] / 6.0 + alpha * (q1[a] * q0[a + 1] * dinv[a + 1] + q2[a] * q1[a + 1] * dinv[a + 2]);
    }
    if (a + 2 < m) d2[a] = alpha * q2[a] * q0[a + 2] * dinv[a + 2];
    rhs[a] = q0[a] * k.y[a] + q1[a] * k.y[a + 1] + q2[a] * k.y[a + 2];
  }

  // Banded LDL^T, half-bandwidth 2.
  std::vector<double> D(m), l1(m, 0.0), l2(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (i >= 2) l2[i] = d2[i - 2] / D[i - 2];
    if (i >= 1) {
      double v = d1[i - 1];
      if (i >= 2) v -= l2[i] * D[i - 2] * l1[i - 1];
      l1[i] = v / D[i - 1];
    }
    double di = d0[i];
    if (i >= 1) di -= l1[i] * l1[i] * D[i - 1];
    if (i >= 2) di -= l2[i] * l2[i] * D[i - 2];
    D[i] = di;
  }
  std::vector<double> gamma(m);
  for (std::size_t i = 0; i < m; ++i) {
    double v = rhs[i];
    if (i >= 1) v -= l1[i] * gamma[i - 1];
    if (i >= 2) v -= l2[i] * gamma[i - 2];
    gamma[i] = v;
  }
  for (std::size_t i = 0; i < m; ++i) gamma[i] /= D[i];
  for (std::size_t i = m; i-- > 0;) {
    if (i + 1 < m) gamma[i] -= l1[i + 1] * gamma[i + 1];
    if (i + 2 < m) gamma[i] -= l2[i + 2] * gamma[i + 2];
  }

  std::vector<double> fitted(k.y);
  for (std::size_t a = 0; a < m; ++a) {
    fitted[a] -= alpha * dinv[a] * q0[a] * gamma[a];
    fitted[a + 1] -= alpha * dinv[a + 1] * q1[a] * gamma[a];
    fitted[a + 2] -= alpha * dinv[a + 2] * q2[a] * gamma[a];
  }
  std::vector<double> second(n, 0.0);
  std::copy(gamma.begin(), gamma.end(), second.begin() + 1);

  SmoothingSplineResult r;
  r.alpha = alpha;
  r.residual = residual_of(k, fitted);
  r.spline = CubicSpline(k.x, std::move(fitted), std::move(second));
  return r;
}

// Scale at which the penalty and data terms are comparable.
double natural_alpha(const Knots& k) {
  const std::size_t n = k.x.size();
  double r_sum = 0.0, q_sum = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double h0 = k.x[i + 1] - k.x[i];
    const double h1 = k.x[i + 2] - k.x[i + 1];
    r_sum += (h0 + h1) / 3.0;
    const double a = 1.0 / h0, c = 1.0 / h1, b = -a - c;
    q_sum += a * a / k.w[i] + b * b / k.w[i + 1] + c * c / k.w[i + 2];
  }
  return q_sum > 0.0 ? r_sum / q_sum : 1.0;
}

}  // namespace

SmoothingSplineResult smoothing_spline_for_alpha(std::span<const double> t, std::span<const double> y,
                                                 std::span<const double> w, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("smoothing spline: alpha must be >= 0");
  const Knots k = collapse(t, y, w);
  if (std::isinf(alpha)) return straight_line(k);
  return reinsch(k, alpha);
}

SmoothingSplineResult fit_smoothing_spline(std::span<const double> t, std::span<const double> y,
                                           std::span<const double> w, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("smoothing spline: budget must be >= 0");
  const Knots k = collapse(t, y, w);

  auto line = straight_line(k);
  line.budget = budget;
  if (line.residual <= budget) return line;

  if (k.scatter >= budget || k.x.size() < 3) {
    auto r = reinsch(k, 0.0);
    r.budget = budget;
    r.budget_active = k.scatter == budget;
    r.feasible = r.residual <= budget;
    return r;
  }

  const double a0 = natural_alpha(k);
  double lo = a0;
  double hi = a0;
  auto res_lo = reinsch(k, lo);
  for (int i = 0; i < 80 && res_lo.residual > budget; ++i) {
    hi = lo;
    lo /= 10.0;
    res_lo = reinsch(k, lo);
  }
  if (res_lo.residual > budget) {
    res_lo = reinsch(k, 0.0);
    lo = 0.0;
  }
  if (hi == lo) {
    auto res_hi = reinsch(k, hi);
    for (int i = 0; i < 80 && res_hi.residual <= budget; ++i) {
      lo = hi;
      res_lo = std::move(res_hi);
      hi *= 10.0;
      res_hi = reinsch(k, hi);
    }
    if (res_hi.residual <= budget) {
      // Numerically indistinguishable from the line, which misses the budget.
      res_lo.budget = budget;
      res_lo.budget_active = true;
      return res_lo;
    }
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : hi / 1e6;
    auto res_mid = reinsch(k, mid);
    if (res_mid.residual <= budget) {
      lo = mid;
      res_lo = std::move(res_mid);
    } else {
      hi = mid;
    }
    if (lo > 0.0 && hi / lo - 1.0 < 1e-13) break;
    if (budget - res_lo.residual <= 1e-12 * budget) break;
  }
  res_lo.budget = budget;
  res_lo.budget_active = true;
  return res_lo;
}

}  // namespace rrprd
