#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rrprd {

// Polynomial on t in [0, 1] stored as a Chebyshev series in x = 2t - 1.
class ChebyshevPolynomial {
public:
  ChebyshevPolynomial() = default;
  explicit ChebyshevPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  double value(double t) const;
  double derivative(double t) const;  // d/dt
  std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
  const std::vector<double>& chebyshev_coefficients() const { return coeffs_; }
  // a_0 + a_1 t + ... + a_d t^d
  std::vector<double> monomial_coefficients() const;

private:
  std::vector<double> coeffs_;
};

// Weighted least squares: argmin sum_i w_i (y_i - D(t_i))^2 over polynomials of
// degree <= `degree`. The degree drops to (#distinct t) - 1 when data is short.
// Solved by QR in the Chebyshev basis. Throws on empty input or non-positive weights.
ChebyshevPolynomial fit_weighted_polynomial(std::span<const double> t, std::span<const double> y,
                                            std::span<const double> w, std::size_t degree);

// Natural cubic spline through (x_i, y_i) with second derivatives m_i, extended
// linearly outside [x_0, x_{n-1}].
class CubicSpline {
public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y, std::vector<double> m);

  // Natural interpolating spline.
  static CubicSpline interpolating(std::vector<double> x, std::vector<double> y);

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  // integral of s''(t)^2 over [x_0, x_{n-1}]
  double roughness() const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& second_derivatives() const { return m_; }

private:
  std::size_t segment(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

// Frequency-bin curve over normalized time, polynomial or spline.
class RidgeCurve {
public:
  RidgeCurve() = default;
  RidgeCurve(ChebyshevPolynomial p) : impl_(std::move(p)) {}
  RidgeCurve(CubicSpline s) : impl_(std::move(s)) {}

  double value(double t) const;
  double derivative(double t) const;

  bool is_spline() const { return std::holds_alternative<CubicSpline>(impl_); }
  const ChebyshevPolynomial* polynomial() const { return std::get_if<ChebyshevPolynomial>(&impl_); }
  const CubicSpline* spline() const { return std::get_if<CubicSpline>(&impl_); }

  // Human-readable coefficients block (monomial coefficients or knot table).
  std::string describe() const;

private:
  std::variant<ChebyshevPolynomial, CubicSpline> impl_;
};

}  // namespace rrprd
