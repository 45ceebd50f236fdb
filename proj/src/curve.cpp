#include "rrprd/curve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rrprd {

double ChebyshevPolynomial::value(double t) const {
  if (coeffs_.empty()) return 0.0;
  const double x = 2.0 * t - 1.0;
  // Clenshaw
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) {
    const double b0 = 2.0 * x * b1 - b2 + coeffs_[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + coeffs_[0];
}

double ChebyshevPolynomial::derivative(double t) const {
  const std::size_t n = coeffs_.size();
  if (n < 2) return 0.0;
  std::vector<double> d(n + 1, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * static_cast<double>(k) * coeffs_[k];
  d[0] *= 0.5;
  d.resize(n - 1);
  return 2.0 * ChebyshevPolynomial(std::move(d)).value(t);
}

std::vector<double> ChebyshevPolynomial::monomial_coefficients() const {
  const std::size_t n = coeffs_.size();
  if (n == 0) return {};
  // Monomial coefficients in x of T_k, by T_{k+1} = 2x T_k - T_{k-1}.
  std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
  T[0][0] = 1.0;
  if (n > 1) T[1][1] = 1.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = -T[k - 1][j];
      if (j > 0) v += 2.0 * T[k][j - 1];
      T[k + 1][j] = v;
    }
  }
  std::vector<double> in_x(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) in_x[j] += coeffs_[k] * T[k][j];
  }
  // Substitute x = 2t - 1.
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double binom = 1.0;  // C(j, i)
    for (std::size_t i = 0; i <= j; ++i) {
      out[i] += in_x[j] * binom * std::pow(2.0, static_cast<double>(i)) *
                std::pow(-1.0, static_cast<double>(j - i));
      binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
    }
  }
  return out;
}

ChebyshevPolynomial fit_weighted_polynomial(std::span<const double> t, std::span<const double> y,
                                            std::span<const double> w, std::size_t degree) {
  const std::size_t m = t.size();
  if (m == 0) throw std::invalid_argument("fit_weighted_polynomial: no data");
  if (y.size() != m || w.size() != m) throw std::invalid_argument("fit_weighted_polynomial: size mismatch");
  double w_max = 0.0;
  for (double wi : w) {
    if (!(wi > 0.0) || !std::isfinite(wi)) throw std::invalid_argument("fit_weighted_polynomial: weights must be positive");
    w_max = std::max(w_max, wi);
  }
  const std::size_t distinct = std::set<double>(t.begin(), t.end()).size();
  const std::size_t d = std::min(degree, distinct - 1);

  Eigen::MatrixXd A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double sw = std::sqrt(w[i] / w_max);
    const double x = 2.0 * t[i] - 1.0;
    double t_prev = 1.0;
    double t_cur = x;
    const auto r = static_cast<Eigen::Index>(i);
    A(r, 0) = sw;
    if (d >= 1) A(r, 1) = sw * x;
    for (std::size_t k = 2; k <= d; ++k) {
      const double t_next = 2.0 * x * t_cur - t_prev;
      A(r, static_cast<Eigen::Index>(k)) = sw * t_next;
      t_prev = t_cur;
      t_cur = t_next;
    }
    b(r) = sw * y[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return ChebyshevPolynomial(std::vector<double>(c.data(), c.data() + c.size()));
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, std::vector<double> m)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(m)) {
  if (x_.empty() || y_.size() != x_.size() || m_.size() != x_.size()) {
    throw std::invalid_argument("CubicSpline: knots, values and second derivatives must have equal nonzero size");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: knots must be strictly increasing");
  }
}

CubicSpline CubicSpline::interpolating(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n >= 3) {
    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double h0 = x[i + 1] - x[i];
      const double h1 = x[i + 2] - x[i + 1];
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs[i] = (y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0;
    }
    for (std::size_t i = 1; i < k; ++i) {
      const double f = upper[i - 1] / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
  }
  return CubicSpline(std::move(x), std::move(y), std::move(m));
}

std::size_t CubicSpline::segment(double t) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double CubicSpline::value(double t) const {
  if (x_.size() == 1) return y_[0];
  if (t <= x_.front()) return y_.front() + derivative(x_.front()) * (t - x_.front());
  if (t >= x_.back()) return y_.back() + derivative(x_.back()) * (t - x_.back());
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
  if (x_.size() == 1) return 0.0;
  const double tc = std::clamp(t, x_.front(), x_.back());
  const std::size_t i = segment(tc);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - tc) / h;
  const double b = (tc - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]);
}

double CubicSpline::second_derivative(double t) const {
  if (x_.size() == 1 || t <= x_.front() || t >= x_.back()) return 0.0;
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  return ((x_[i + 1] - t) * m_[i] + (t - x_[i]) * m_[i + 1]) / h;
}

double CubicSpline::roughness() const {
  // s'' is linear on each segment.
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double h = x_[i + 1] - x_[i];
    acc += h / 3.0 * (m_[i] * m_[i] + m_[i] * m_[i + 1] + m_[i + 1] * m_[i + 1]);
  }
  return acc;
}

double RidgeCurve::value(double t) const {
  return std::visit([t](const auto& c) { return c.value(t); }, impl_);
}

double RidgeCurve::derivative(double t) const {
  return std::visit([t](const auto& c) { return c.derivative(t); }, impl_);
}

std::string RidgeCurve::describe() const {
  std::ostringstream os;
  os << std::setprecision(17);
  if (const auto* p = polynomial()) {
    os << "polynomial degree " << p->degree() << "\n";
    const auto mono = p->monomial_coefficients();
    for (std::size_t i = 0; i < mono.size(); ++i) os << "a" << i << " " << mono[i] << "\n";
  } else if (const auto* s = spline()) {
    os << "cubic_spline knots " << s->knots().size() << "\n";
    os << "t,value,second_derivative\n";
    for (std::size_t i = 0; i < s->knots().size(); ++i) {
      os << s->knots()[i] << "," << s->values()[i] << "," << s->second_derivatives()[i] << "\n";
    }
  }
  return os.str();
}

}  // namespace rrprd
