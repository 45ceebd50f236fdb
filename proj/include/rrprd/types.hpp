#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rrprd {

using cplx = std::complex<double>;

// Dense row-major matrix indexed [time n, frequency bin k].
template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t n, std::size_t k) { return data_[n * cols_ + k]; }
  const T& operator()(std::size_t n, std::size_t k) const { return data_[n * cols_ + k]; }

  std::span<T> row(std::size_t n) { return {data_.data() + n * cols_, cols_}; }
  std::span<const T> row(std::size_t n) const { return {data_.data() + n * cols_, cols_}; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Discrete-time complex signal; sample n sits at normalized time n / L.
struct Signal {
  std::vector<cplx> samples;

  Signal() = default;
  explicit Signal(std::vector<cplx> s) : samples(std::move(s)) {}
  explicit Signal(std::size_t length) : samples(length, cplx{0.0, 0.0}) {}

  std::size_t length() const { return samples.size(); }
  cplx& operator[](std::size_t n) { return samples[n]; }
  const cplx& operator[](std::size_t n) const { return samples[n]; }

  // L >= 2 and all samples finite.
  void validate() const {
    if (samples.size() < 2) throw std::invalid_argument("Signal: length must be >= 2");
    for (const auto& z : samples) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument("Signal: non-finite sample");
      }
    }
  }
};

inline Signal operator+(const Signal& a, const Signal& b) {
  if (a.length() != b.length()) throw std::invalid_argument("Signal: length mismatch in sum");
  Signal out(a.length());
  for (std::size_t n = 0; n < a.length(); ++n) out[n] = a[n] + b[n];
  return out;
}

// Nearest integer, halves rounded away from zero.
inline long round_half_away(double x) { return static_cast<long>(std::lround(x)); }

inline long clamp_bin(long k, std::size_t n_bins) {
  if (k < 0) return 0;
  const long hi = static_cast<long>(n_bins) - 1;
  return k > hi ? hi : k;
}

}  // namespace rrprd
