#pragma once

#include "rrprd/classic_rd.hpp"
#include "rrprd/ridge_fit.hpp"

#include <vector>

namespace rrprd {

// One reconstructed mode, length L.
using ModeEstimate = Signal;

// f_p[n] = sum of V[n, k] over the band of mode p, divided by g[0] N.
// Empty bands give zero samples.
std::vector<ModeEstimate> reconstruct_band(const TfGrid& grid, const BandSet& bands);

struct LcrResult {
  std::vector<ModeEstimate> modes;
  Grid<cplx> synthesized;  // sum over modes of the resynthesized columns (denoised STFT)
};

// Per mode and time, the column is rebuilt from its value at the nearest bin
// k0 of the curve, assuming a linear chirp with the curve's frequency and
// slope, then summed over frequency. Bins where the Gaussian factor drops below
// 1e-8 are skipped.
LcrResult reconstruct_lcr(const TfGrid& grid, const std::vector<RidgeCurve>& curves, double sigma,
                          ChirpUnits units = ChirpUnits::Hz, bool keep_grid = false);

// Rebuilt value at bin k from V[n, k0]; exposed for tests.
cplx lcr_coefficient(cplx v_k0, long k0, long k, double ridge_hz, double chirp_rate, double sigma,
                     std::size_t L, std::size_t N);

// Bands of +/- 3 std_LC around each ridge, with the chirp rate read from q_hat
// at the ridge point; overlaps split at the midpoint.
BandSet classic_bands(const std::vector<Ridge>& ridges, const ModulationGrid& qhat, double sigma,
                      std::size_t L, std::size_t N);

std::vector<ModeEstimate> reconstruct_classic(const TfGrid& grid, const std::vector<Ridge>& ridges,
                                              const ModulationGrid& qhat, double sigma);

}  // namespace rrprd
