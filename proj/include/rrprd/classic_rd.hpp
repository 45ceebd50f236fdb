#pragma once

#include "rrprd/tfr.hpp"

#include <vector>

namespace rrprd {

// Integer frequency-bin estimate of phi'_p[n] N / L for every time index.
struct Ridge {
  std::vector<long> bins;
};

struct PeelOptions {
  std::size_t num_modes = 1;   // P
  double delta_hz = 0.0;       // separation; band half-width ceil(delta N / L) is zeroed after each ridge
  std::size_t init_count = 16; // initialization indices, evenly spaced in [M, L-1-M]
};

// Evenly spaced initialization indices in [M, L-1-M] (falls back to the full
// range when the window is wider than the signal).
std::vector<std::size_t> peeling_init_indices(std::size_t L, std::size_t M, std::size_t count);

// Peeling detector with a fixed modulation bound: ridge steps are limited to
// +/- ceil(N B_f / L^2) bins. Ridges are returned in extraction order.
std::vector<Ridge> detect_srd(const TfGrid& grid, double bound_hz_per_s, const PeelOptions& opt);

// Peeling detector steered by q_hat: the window at step n -> n+1 is centered on
// phi[n] + round(q_hat[n, phi[n]] N / L^2) with half-width C.
std::vector<Ridge> detect_mbrd(const TfGrid& grid, const ModulationGrid& qhat, long slack_bins,
                               const PeelOptions& opt);

// ceil(N B_f / L^2)
long srd_step_bound(double bound_hz_per_s, std::size_t L, std::size_t N);

// ceil(delta N / L)
long peel_half_width(double delta_hz, std::size_t L, std::size_t N);

}  // namespace rrprd
