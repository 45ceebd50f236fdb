#pragma once

#include "rrprd/types.hpp"

#include <vector>

namespace rrprd {

// Gaussian window g(t) = exp(-pi t^2 / sigma^2) and the four companions needed
// by the chirp-rate estimator, tabulated at t = n / L for n = -M..M (index n + M).
// Derivatives are taken with respect to normalized time t.
struct WindowSet {
  double sigma = 0.0;
  std::size_t L = 0;
  std::size_t N = 0;
  std::size_t M = 0;
  bool support_clipped = false;  // true when 2M+1 had to be cut down to fit N

  std::vector<double> g;
  std::vector<double> dg;   // g'
  std::vector<double> tg;   // t g
  std::vector<double> ddg;  // g''
  std::vector<double> tdg;  // t g'

  double g0() const { return g[M]; }
  std::size_t size() const { return 2 * M + 1; }
};

// Half-support giving g[M] < 1e-6, before clipping to N.
std::size_t required_half_support(double sigma, std::size_t L);

// Throws std::invalid_argument for sigma <= 0, N < 3 or L < 2. When the required
// support does not fit (2M+1 > N) it is clipped to (N-1)/2 and support_clipped is set.
WindowSet make_windows(double sigma, std::size_t L, std::size_t N);

// STFT with the Gaussian window; bin k stands for frequency k L / N.
struct TfGrid {
  Grid<cplx> values;  // [n, k]
  WindowSet window;

  std::size_t L() const { return values.rows(); }
  std::size_t N() const { return values.cols(); }
};

// values[m, k] = sum_{n=0}^{N-1} f[n+m-M] g[n-M] exp(-2 i pi k (n-M) / N), with
// samples outside [0, L) read as zero.
TfGrid stft(const Signal& f, const WindowSet& w);

// Same transform with an arbitrary tabulated window of length 2M+1 (index n + M).
Grid<cplx> stft_with_window(const Signal& f, std::span<const double> window, std::size_t M,
                            std::size_t N);

// f[n] = sum_k values[n, k] / (g[0] N).
Signal istft(const TfGrid& grid);

// |V|^2
Grid<double> spectrogram(const TfGrid& grid);

// Real part of the second-order modulation operator, in Hz per unit normalized
// time. Entries whose denominator is below 1e-6 x the column's median |V|^2 are 0.
struct ModulationGrid {
  Grid<double> q_hat;
};

ModulationGrid modulation_estimate(const Signal& f, const WindowSet& w);

// Order-3 Renyi entropy (bits) of |V|^2 / sum |V|^2. Throws on an all-zero spectrogram.
double renyi_entropy(const Grid<double>& spec);

// Candidate sigma with the lowest spectrogram Renyi entropy; first wins ties.
double select_sigma_renyi(const Signal& f, const std::vector<double>& candidates, std::size_t N);

// Geometric grid of `count` values spanning [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

// Pure-harmonic standard deviation 1 / (sqrt(2 pi) sigma), in Hz.
double pure_harmonic_std(double sigma);

// Linear-chirp spectral standard deviation sqrt(1 + sigma^4 c^2) / (sqrt(2 pi) sigma), in Hz.
double linear_chirp_std(double sigma, double chirp_rate);

}  // namespace rrprd
