#include "rrprd/tfr.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace rrprd {

namespace {

constexpr double kPi = std::numbers::pi;

// Fills the length-N frame so that buf[(j) mod N] = f[m + j] win[j + M], j = -M..M.
void load_frame(const Signal& f, std::span<const double> win, std::size_t M, std::size_t m,
                std::span<cplx> buf) {
  std::fill(buf.begin(), buf.end(), cplx{});
  const long L = static_cast<long>(f.length());
  const long N = static_cast<long>(buf.size());
  const long iM = static_cast<long>(M);
  for (long j = -iM; j <= iM; ++j) {
    const long idx = static_cast<long>(m) + j;
    if (idx < 0 || idx >= L) continue;
    buf[static_cast<std::size_t>(((j % N) + N) % N)] = f[static_cast<std::size_t>(idx)] * win[static_cast<std::size_t>(j + iM)];
  }
}

}  // namespace

double pure_harmonic_std(double sigma) { return 1.0 / (std::sqrt(2.0 * kPi) * sigma); }

double linear_chirp_std(double sigma, double chirp_rate) {
  const double s2 = sigma * sigma;
  return std::sqrt(1.0 + s2 * s2 * chirp_rate * chirp_rate) / (std::sqrt(2.0 * kPi) * sigma);
}

std::size_t required_half_support(double sigma, std::size_t L) {
  const double width = sigma * static_cast<double>(L);
  auto M = static_cast<std::size_t>(std::ceil(width * std::sqrt(std::log(1e6) / kPi)));
  while (std::exp(-kPi * static_cast<double>(M * M) / (width * width)) >= 1e-6) ++M;
  return M;
}

WindowSet make_windows(double sigma, std::size_t L, std::size_t N) {
  if (!(sigma > 0.0)) throw std::invalid_argument("make_windows: sigma must be > 0");
  if (N < 3) throw std::invalid_argument("make_windows: N must be >= 3");
  if (L < 2) throw std::invalid_argument("make_windows: L must be >= 2");

  WindowSet w;
  w.sigma = sigma;
  w.L = L;
  w.N = N;
  w.M = required_half_support(sigma, L);
  const std::size_t max_m = (N - 1) / 2;
  if (w.M > max_m) {
    std::cerr << "warning: window support 2M+1=" << 2 * w.M + 1 << " exceeds N=" << N
              << " for sigma=" << sigma << "; clipped to M=" << max_m << "\n";
    w.M = max_m;
    w.support_clipped = true;
  }

  const std::size_t size = 2 * w.M + 1;
  w.g.resize(size);
  w.dg.resize(size);
  w.tg.resize(size);
  w.ddg.resize(size);
  w.tdg.resize(size);
  const double s2 = sigma * sigma;
  for (std::size_t i = 0; i < size; ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(w.M)) / static_cast<double>(L);
    const double g = std::exp(-kPi * t * t / s2);
    const double dg = -2.0 * kPi * t / s2 * g;
    w.g[i] = g;
    w.dg[i] = dg;
    w.tg[i] = t * g;
    w.ddg[i] = (4.0 * kPi * kPi * t * t / (s2 * s2) - 2.0 * kPi / s2) * g;
    w.tdg[i] = t * dg;
  }
  return w;
}

Grid<cplx> stft_with_window(const Signal& f, std::span<const double> window, std::size_t M,
                            std::size_t N) {
  if (window.size() != 2 * M + 1) throw std::invalid_argument("stft: window length must be 2M+1");
  if (2 * M + 1 > N) throw std::invalid_argument("stft: 2M+1 must be <= N");
  const std::size_t L = f.length();
  Grid<cplx> out(L, N);
  detail::Fft fft(N);
  auto buf = fft.buffer();
  for (std::size_t m = 0; m < L; ++m) {
    load_frame(f, window, M, m, buf);
    fft.execute();
    std::copy(buf.begin(), buf.end(), out.row(m).begin());
  }
  return out;
}

TfGrid stft(const Signal& f, const WindowSet& w) {
  if (f.length() != w.L) throw std::invalid_argument("stft: signal length does not match window set");
  return TfGrid{stft_with_window(f, w.g, w.M, w.N), w};
}

Signal istft(const TfGrid& grid) {
  const double g0 = grid.window.g.empty() ? 0.0 : grid.window.g0();
  if (g0 == 0.0) throw std::invalid_argument("istft: g[0] must be non-zero");
  const double scale = 1.0 / (g0 * static_cast<double>(grid.N()));
  Signal out(grid.L());
  for (std::size_t n = 0; n < grid.L(); ++n) {
    cplx acc{};
    for (const auto& v : grid.values.row(n)) acc += v;
    out[n] = acc * scale;
  }
  return out;
}

Grid<double> spectrogram(const TfGrid& grid) {
  Grid<double> out(grid.L(), grid.N());
  const auto& in = grid.values.data();
  auto& dst = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = std::norm(in[i]);
  return out;
}

ModulationGrid modulation_estimate(const Signal& f, const WindowSet& w) {
  if (f.length() != w.L) throw std::invalid_argument("modulation_estimate: length mismatch");
  const std::size_t L = w.L;
  const std::size_t N = w.N;

  detail::Fft f_g(N), f_dg(N), f_tg(N), f_ddg(N), f_tdg(N);
  ModulationGrid out{Grid<double>(L, N, 0.0)};
  std::vector<double> mag2(N);

  for (std::size_t m = 0; m < L; ++m) {
    load_frame(f, w.g, w.M, m, f_g.buffer());
    load_frame(f, w.dg, w.M, m, f_dg.buffer());
    load_frame(f, w.tg, w.M, m, f_tg.buffer());
    load_frame(f, w.ddg, w.M, m, f_ddg.buffer());
    load_frame(f, w.tdg, w.M, m, f_tdg.buffer());
    f_g.execute();
    f_dg.execute();
    f_tg.execute();
    f_ddg.execute();
    f_tdg.execute();

    const auto vg = f_g.buffer();
    const auto vdg = f_dg.buffer();
    const auto vtg = f_tg.buffer();
    const auto vddg = f_ddg.buffer();
    const auto vtdg = f_tdg.buffer();

    for (std::size_t k = 0; k < N; ++k) mag2[k] = std::norm(vg[k]);
    std::nth_element(mag2.begin(), mag2.begin() + static_cast<long>(N / 2), mag2.end());
    const double guard = 1e-6 * mag2[N / 2];

    auto row = out.q_hat.row(m);
    for (std::size_t k = 0; k < N; ++k) {
      const cplx num = vddg[k] * vg[k] - vdg[k] * vdg[k];
      const cplx den = vtg[k] * vdg[k] - vtdg[k] * vg[k];
      const double den_mag = std::abs(den);
      if (!(den_mag > guard) || den_mag == 0.0) {
        row[k] = 0.0;
        continue;
      }
      // Re(z / (2 i pi)) = Im(z) / (2 pi)
      const double q = (num / den).imag() / (2.0 * kPi);
      row[k] = std::isfinite(q) ? q : 0.0;
    }
  }
  return out;
}

double renyi_entropy(const Grid<double>& spec) {
  double total = 0.0;
  for (double v : spec.data()) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("renyi_entropy: all-zero spectrogram");
  double acc = 0.0;
  for (double v : spec.data()) {
    const double p = v / total;
    acc += p * p * p;
  }
  // (1 / (1 - alpha)) log2 sum p^alpha with alpha = 3
  return -0.5 * std::log2(acc);
}

double select_sigma_renyi(const Signal& f, const std::vector<double>& candidates, std::size_t N) {
  if (candidates.empty()) throw std::invalid_argument("select_sigma_renyi: no candidates");
  if (candidates.size() == 1) return candidates.front();
  double best = candidates.front();
  double best_h = std::numeric_limits<double>::infinity();
  for (double s : candidates) {
    const auto w = make_windows(s, f.length(), N);
    const double h = renyi_entropy(spectrogram(stft(f, w)));
    if (h < best_h) {
      best_h = h;
      best = s;
    }
  }
  return best;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw std::invalid_argument("geometric_grid: bad range");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(ratio * static_cast<double>(i));
  out.back() = hi;
  return out;
}

}  // namespace rrprd
