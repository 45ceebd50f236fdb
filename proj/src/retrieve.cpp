#include "rrprd/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rrprd {

std::vector<ModeEstimate> reconstruct_band(const TfGrid& grid, const BandSet& bands) {
  const std::size_t L = grid.L();
  const std::size_t N = grid.N();
  const double scale = 1.0 / (grid.window.g0() * static_cast<double>(N));
  std::vector<ModeEstimate> out;
  for (const auto& mode : bands.bands) {
    if (mode.size() != L) throw std::invalid_argument("reconstruct_band: band length differs from L");
    ModeEstimate f(L);
    for (std::size_t n = 0; n < L; ++n) {
      const BinInterval b = mode[n];
      if (b.empty()) continue;
      const auto row = grid.values.row(n);
      cplx acc{0.0, 0.0};
      for (long k = std::max(b.lo, 0L); k <= std::min(b.hi, static_cast<long>(N) - 1); ++k) {
        acc += row[static_cast<std::size_t>(k)];
      }
      f[n] = acc * scale;
    }
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

struct LcrShape {
  cplx factor;     // pi sigma^2 (1 + i c sigma^2) / (1 + c^2 sigma^4)
  double spread;   // (1 + c^2 sigma^4) / (pi sigma^2)
};

LcrShape lcr_shape(double c, double sigma) {
  const double s2 = sigma * sigma;
  const double den = 1.0 + c * c * s2 * s2;
  return {std::numbers::pi * s2 * cplx{1.0, c * s2} / den, den / (std::numbers::pi * s2)};
}

cplx lcr_value(cplx v_k0, const LcrShape& sh, long k0, long k, double ridge_hz, double L, double N) {
  const double a = L * static_cast<double>(k0 - k) / N;
  const double b = L * static_cast<double>(k0 + k) / N - 2.0 * ridge_hz;
  return v_k0 * std::exp(sh.factor * (a * b));
}

}  // namespace

cplx lcr_coefficient(cplx v_k0, long k0, long k, double ridge_hz, double chirp_rate, double sigma,
                     std::size_t L, std::size_t N) {
  return lcr_value(v_k0, lcr_shape(chirp_rate, sigma), k0, k, ridge_hz, static_cast<double>(L),
                   static_cast<double>(N));
}

LcrResult reconstruct_lcr(const TfGrid& grid, const std::vector<RidgeCurve>& curves, double sigma,
                          ChirpUnits units, bool keep_grid) {
  const std::size_t L = grid.L();
  const std::size_t N = grid.N();
  const double Ld = static_cast<double>(L);
  const double Nd = static_cast<double>(N);
  const double scale = 1.0 / (grid.window.g0() * Nd);
  // |factor| >= 1e-8  <=>  (Lk/N - f)^2 <= (Lk0/N - f)^2 + ln(1e8) * spread
  const double log_floor = std::log(1e8);

  LcrResult res;
  if (keep_grid) res.synthesized = Grid<cplx>(L, N);
  for (const auto& curve : curves) {
    ModeEstimate f(L);
    for (std::size_t n = 0; n < L; ++n) {
      const double t = static_cast<double>(n) / Ld;
      const double bin = curve.value(t);
      if (!std::isfinite(bin)) continue;
      const long k0 = clamp_bin(round_half_away(bin), N);
      const double ridge_hz = bin * Ld / Nd;
      const LcrShape sh = lcr_shape(curve_chirp_rate(curve, t, L, N, units), sigma);
      const double off0 = Ld * static_cast<double>(k0) / Nd - ridge_hz;
      const double reach_hz = std::sqrt(off0 * off0 + log_floor * sh.spread);
      const long lo = std::max(0L, static_cast<long>(std::ceil((ridge_hz - reach_hz) * Nd / Ld)));
      const long hi = std::min(static_cast<long>(N) - 1, static_cast<long>(std::floor((ridge_hz + reach_hz) * Nd / Ld)));
      const cplx v0 = grid.values(n, static_cast<std::size_t>(k0));
      cplx acc{0.0, 0.0};
      for (long k = lo; k <= hi; ++k) {
        const cplx v = lcr_value(v0, sh, k0, k, ridge_hz, Ld, Nd);
        acc += v;
        if (keep_grid) res.synthesized(n, static_cast<std::size_t>(k)) += v;
      }
      f[n] = acc * scale;
    }
    res.modes.push_back(std::move(f));
  }
  return res;
}

BandSet classic_bands(const std::vector<Ridge>& ridges, const ModulationGrid& qhat, double sigma,
                      std::size_t L, std::size_t N) {
  const double to_bins = static_cast<double>(N) / static_cast<double>(L);
  BandSet out;
  out.bands.assign(ridges.size(), std::vector<BinInterval>(L));
  for (std::size_t p = 0; p < ridges.size(); ++p) {
    if (ridges[p].bins.size() != L) throw std::invalid_argument("classic_bands: ridge length differs from L");
    for (std::size_t n = 0; n < L; ++n) {
      const long k = clamp_bin(ridges[p].bins[n], N);
      const double q = qhat.q_hat(n, static_cast<std::size_t>(k));
      const double half = 3.0 * linear_chirp_std(sigma, q) * to_bins;
      out.bands[p][n] = bin_interval(static_cast<double>(k), half, N);
    }
  }
  // Ridges come in extraction order; split overlaps between frequency neighbors.
  std::vector<std::size_t> order(ridges.size());
  for (std::size_t n = 0; n < L; ++n) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ridges[a].bins[n] < ridges[b].bins[n]; });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      BinInterval& lower = out.bands[order[i]][n];
      BinInterval& upper = out.bands[order[i + 1]][n];
      if (lower.empty() || upper.empty() || lower.hi < upper.lo) continue;
      const long first = std::min(lower.lo, upper.lo);
      const long last = std::max(lower.hi, upper.hi);
      const long mid = static_cast<long>(std::floor(0.5 * static_cast<double>(lower.hi + upper.lo)));
      lower = BinInterval{first, mid};
      upper = BinInterval{mid + 1, last};
    }
  }
  return out;
}

std::vector<ModeEstimate> reconstruct_classic(const TfGrid& grid, const std::vector<Ridge>& ridges,
                                              const ModulationGrid& qhat, double sigma) {
  return reconstruct_band(grid, classic_bands(ridges, qhat, sigma, grid.L(), grid.N()));
}

}  // namespace rrprd
