#pragma once

#include "rrprd/curve.hpp"
#include "rrprd/rrp_extract.hpp"

#include <functional>
#include <vector>

namespace rrprd {

// How a curve's t-derivative (bins per unit time) becomes the chirp rate used
// in the linear-chirp bandwidth.
enum class ChirpUnits {
  Hz,       // derivative x L / N, in Hz per unit time (default)
  Literal,  // derivative used as is
};

double curve_chirp_rate(const RidgeCurve& curve, double t, std::size_t L, std::size_t N,
                        ChirpUnits units = ChirpUnits::Hz);

// Smooth frequency-bin curve for one mode plus the groups it was fitted to.
struct RidgeModel {
  RidgeCurve curve;
  std::vector<std::size_t> groups;  // indices into the fitter's group list
};

// Per mode and time index: inclusive reconstruction band [lo, hi] in bins.
struct BandSet {
  std::vector<std::vector<BinInterval>> bands;  // [mode][n]

  std::size_t modes() const { return bands.size(); }
};

// Resolves overlaps between adjacent modes (ordered by frequency): the shared
// range is split at floor((hi_p + lo_{p+1}) / 2), lower half to mode p.
void split_overlaps(BandSet& bands);

// Bands curve(n/L) -/+ 3 std_LC N / L around each model, overlaps split.
BandSet ridge_bands(const std::vector<RidgeCurve>& curves, double sigma, std::size_t L, std::size_t N,
                    ChirpUnits units = ChirpUnits::Hz);

struct FitOptions {
  std::size_t num_modes = 1;  // P
  std::size_t degree = 5;     // polynomial path only
  double tol_bins = 3.0;      // spline path only
  ChirpUnits units = ChirpUnits::Hz;
  bool post_process = true;
  // Candidate P-subsets evaluated per newly considered group (highest energy first).
  std::size_t max_candidates = 8;
};

struct FitResult {
  std::vector<RidgeModel> models;      // ordered by increasing frequency
  BandSet bands;
  double energy = 0.0;                 // total energy of the returned curves
  double initial_energy = 0.0;         // E^0
  std::vector<double> accepted_energies;  // incumbent energy after each acceptance, E^0 first
  bool complete = false;               // P modes found
  bool intersecting = false;           // no non-intersecting state was available
  bool used_fallback = false;          // returned an earlier non-intersecting snapshot
  std::size_t max_absorption_rounds = 0;
};

// Fits one curve to weighted (t, bin) samples.
using CurveFitter =
    std::function<RidgeCurve(std::span<const double> t, std::span<const double> y, std::span<const double> w)>;

// Energy-greedy assembly of gathered groups (sorted by decreasing energy) into
// P non-intersecting curves; `fitter` supplies the curve family.
FitResult fit_ridges(const std::vector<RidgeGroup>& groups, const SlcGrid& slc, const FitOptions& opt,
                     const CurveFitter& fitter);

// Degree-d weighted polynomial least squares, weights R(group)^2.
FitResult fit_polynomial_ridges(const std::vector<RidgeGroup>& groups, const SlcGrid& slc,
                                const FitOptions& opt);

// Single mode, cubic smoothing spline with weighted residual budget
// tol^2 * sum(weights) (i.e. (tol R)^2 #M for a single group).
FitResult fit_spline_ridge(const std::vector<RidgeGroup>& groups, const SlcGrid& slc, const FitOptions& opt);

// Sum over n of s_lc at the nearest bin of each curve; points off the grid contribute 0.
double curves_energy(const std::vector<RidgeCurve>& curves, const SlcGrid& slc);

// True when curve_p(n/L) < curve_{p+1}(n/L) for every n and adjacent pair.
bool curves_disjoint(const std::vector<RidgeCurve>& curves, std::size_t L);

}  // namespace rrprd
