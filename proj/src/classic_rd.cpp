#include "rrprd/classic_rd.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace rrprd {

namespace {

// [lo, hi] search window for the step from (n, phi) to n + dir.
using StepWindow = std::function<std::pair<long, long>(std::size_t n, long phi, int dir)>;

constexpr double kMasked = -1.0;

long argmax_in(std::span<const double> col, long lo, long hi) {
  const long N = static_cast<long>(col.size());
  lo = std::max(lo, 0L);
  hi = std::min(hi, N - 1);
  if (lo > hi) {
    // Window entirely outside the grid: clamp to the nearest edge.
    return lo > N - 1 ? N - 1 : 0;
  }
  long best = lo;
  for (long k = lo + 1; k <= hi; ++k) {
    if (col[static_cast<std::size_t>(k)] > col[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

Ridge grow_candidate(const Grid<double>& energy, std::size_t n0, const StepWindow& window) {
  const std::size_t L = energy.rows();
  Ridge r;
  r.bins.assign(L, 0);
  const auto col0 = energy.row(n0);
  r.bins[n0] = argmax_in(col0, 0, static_cast<long>(energy.cols()) - 1);
  for (std::size_t n = n0; n + 1 < L; ++n) {
    const auto [lo, hi] = window(n, r.bins[n], +1);
    r.bins[n + 1] = argmax_in(energy.row(n + 1), lo, hi);
  }
  for (std::size_t n = n0; n > 0; --n) {
    const auto [lo, hi] = window(n, r.bins[n], -1);
    r.bins[n - 1] = argmax_in(energy.row(n - 1), lo, hi);
  }
  return r;
}

double ridge_energy(const Grid<double>& energy, const Ridge& r) {
  double acc = 0.0;
  for (std::size_t n = 0; n < r.bins.size(); ++n) {
    const double v = energy(n, static_cast<std::size_t>(r.bins[n]));
    if (v > 0.0) acc += v;
  }
  return acc;
}

std::vector<Ridge> peel(const TfGrid& grid, const PeelOptions& opt, const StepWindow& window) {
  const std::size_t L = grid.L();
  const std::size_t N = grid.N();
  if (opt.num_modes < 1) throw std::invalid_argument("ridge detection: P must be >= 1");
  const long half = peel_half_width(opt.delta_hz, L, N);
  if (static_cast<long>(opt.num_modes) * (2 * half + 1) >= static_cast<long>(N)) {
    throw std::invalid_argument("ridge detection: P (2 ceil(delta N / L) + 1) >= N, nothing left to peel");
  }

  Grid<double> energy = spectrogram(grid);
  const auto inits = peeling_init_indices(L, grid.window.M, opt.init_count);

  std::vector<Ridge> out;
  for (std::size_t p = 0; p < opt.num_modes; ++p) {
    Ridge best;
    double best_e = -1.0;
    for (std::size_t n0 : inits) {
      Ridge cand = grow_candidate(energy, n0, window);
      const double e = ridge_energy(energy, cand);
      if (e > best_e) {
        best_e = e;
        best = std::move(cand);
      }
    }
    for (std::size_t n = 0; n < L; ++n) {
      const long lo = std::max(best.bins[n] - half, 0L);
      const long hi = std::min(best.bins[n] + half, static_cast<long>(N) - 1);
      for (long k = lo; k <= hi; ++k) energy(n, static_cast<std::size_t>(k)) = kMasked;
    }
    out.push_back(std::move(best));
  }
  return out;
}

}  // namespace

long srd_step_bound(double bound_hz_per_s, std::size_t L, std::size_t N) {
  const double Ld = static_cast<double>(L);
  return static_cast<long>(std::ceil(static_cast<double>(N) * bound_hz_per_s / (Ld * Ld)));
}

long peel_half_width(double delta_hz, std::size_t L, std::size_t N) {
  return static_cast<long>(std::ceil(delta_hz * static_cast<double>(N) / static_cast<double>(L)));
}

std::vector<std::size_t> peeling_init_indices(std::size_t L, std::size_t M, std::size_t count) {
  std::size_t lo = M;
  std::size_t hi = L > M + 1 ? L - 1 - M : 0;
  if (lo > hi) {
    lo = 0;
    hi = L - 1;
  }
  count = std::max<std::size_t>(count, 1);
  std::vector<std::size_t> out;
  if (count == 1) {
    out.push_back((lo + hi) / 2);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double pos = static_cast<double>(lo) +
                       static_cast<double>(hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    const auto n = static_cast<std::size_t>(std::lround(pos));
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

std::vector<Ridge> detect_srd(const TfGrid& grid, double bound_hz_per_s, const PeelOptions& opt) {
  if (!(bound_hz_per_s > 0.0)) throw std::invalid_argument("detect_srd: B_f must be > 0");
  const long step = srd_step_bound(bound_hz_per_s, grid.L(), grid.N());
  return peel(grid, opt, [step](std::size_t, long phi, int) { return std::pair{phi - step, phi + step}; });
}

std::vector<Ridge> detect_mbrd(const TfGrid& grid, const ModulationGrid& qhat, long slack_bins,
                               const PeelOptions& opt) {
  if (slack_bins < 0) throw std::invalid_argument("detect_mbrd: C must be >= 0");
  if (qhat.q_hat.rows() != grid.L() || qhat.q_hat.cols() != grid.N()) {
    throw std::invalid_argument("detect_mbrd: modulation grid dimensions differ from the STFT");
  }
  const double Ld = static_cast<double>(grid.L());
  const double scale = static_cast<double>(grid.N()) / (Ld * Ld);
  return peel(grid, opt, [&qhat, scale, slack_bins](std::size_t n, long phi, int dir) {
    const long shift = round_half_away(qhat.q_hat(n, static_cast<std::size_t>(phi)) * scale);
    const long center = phi + dir * shift;
    return std::pair{center - slack_bins, center + slack_bins};
  });
}

}  // namespace rrprd
