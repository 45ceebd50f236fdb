#pragma once

#include "rrprd/tfr.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace rrprd {

// Spectrogram energy summed over the local linear-chirp bandwidth around every
// TF point, together with the spectrogram it was computed from.
struct SlcGrid {
  Grid<double> s_lc;
  Grid<double> power;  // |V|^2
  double sigma = 0.0;

  std::size_t L() const { return s_lc.rows(); }
  std::size_t N() const { return s_lc.cols(); }
};

// Inclusive bin interval, possibly empty (lo > hi).
struct BinInterval {
  long lo = 0;
  long hi = -1;
  bool contains(long k) const { return k >= lo && k <= hi; }
  bool empty() const { return lo > hi; }
};

// [floor(center - half), ceil(center + half)] clipped to [0, N-1].
BinInterval bin_interval(double center, double half_width_bins, std::size_t N);

// I_LC around bin k for chirp rate q (Hz per unit time).
BinInterval slc_interval(long k, double q, double sigma, std::size_t L, std::size_t N);

// 3 N / (L sqrt(2 pi) sigma): half-width of the pure-harmonic slab I_PH, in bins.
double pure_harmonic_half_width(double sigma, std::size_t L, std::size_t N);

SlcGrid compute_slc(const TfGrid& grid, const ModulationGrid& qhat, double sigma);

// Which per-column local maxima the portion growth may visit. The score used
// for ranking is s_lc in both cases.
enum class MaximaSource {
  Magnitude,  // local maxima of |V| along frequency (default)
  Slc,        // local maxima of s_lc itself
};

// Local maxima of one column: bins in increasing order and their rank by s_lc
// (0 = largest; ties go to the lower bin).
struct ColumnMaxima {
  std::vector<long> bins;
  std::vector<std::uint32_t> rank;
};

// A bin is a local maximum when it rises strictly above its lower neighbor and
// is followed by a plateau that eventually falls strictly; the plateau is
// represented by its lowest bin. Bins 0 and N-1 never qualify.
std::vector<long> local_maxima(std::span<const double> column);

std::vector<ColumnMaxima> column_maxima(const SlcGrid& slc, MaximaSource source);

// Time-contiguous chain of TF points, one per time index from `start`.
struct RidgePortion {
  std::size_t start = 0;
  std::vector<long> bins;  // bins[i] is the frequency bin at time start + i
  double energy = 0.0;     // sum of s_lc over the points
  std::size_t origin = 0;  // initialization index that produced it

  bool empty() const { return bins.empty(); }
  std::size_t end() const { return start + bins.size() - 1; }  // last time index
  bool same_points(const RidgePortion& o) const { return start == o.start && bins == o.bins; }
};

struct GrowResult {
  std::vector<RidgePortion> portions;  // always P entries
  bool padded = false;                 // fewer than P local maxima at n0
};

// P portions seeded at the P largest maxima of column n0 and grown forward and
// backward by nearest-maximum tracking along q_hat; growth stops as soon as the
// tracked maximum falls outside the column's 2P+1 largest maxima.
GrowResult grow_portions(const SlcGrid& slc, const ModulationGrid& qhat, std::size_t n0,
                         std::size_t num_modes, const std::vector<ColumnMaxima>& maxima);

GrowResult grow_portions(const SlcGrid& slc, const ModulationGrid& qhat, std::size_t n0,
                         std::size_t num_modes, MaximaSource source = MaximaSource::Magnitude);

struct RrpOptions {
  std::size_t num_modes = 1;   // P
  std::size_t scale = 8;       // s
  std::size_t init_stride = 1;
  std::size_t margin = 0;      // init indices span [margin, L-1-margin]; normally M
  MaximaSource maxima = MaximaSource::Magnitude;
};

// Portions reproduced identically by s consecutive initialization indices.
// Sorted by (start, bins).
std::vector<RidgePortion> extract_rrps(const SlcGrid& slc, const ModulationGrid& qhat,
                                       const RrpOptions& opt);

// Union of gathered RRPs reduced to one point per time index.
struct RidgeGroup {
  std::vector<std::pair<std::size_t, long>> points;  // (n, k), increasing n
  double energy = 0.0;                               // R: sum of s_lc over the union of member points
  std::vector<std::size_t> members;                  // indices into the gather() input

  std::size_t first_time() const { return points.front().first; }
  std::size_t last_time() const { return points.back().first; }
};

// Merges RRPs whose neighborhoods (pure-harmonic slabs along the portion,
// extended delta_t time bins past each end) intersect, transitively. Sorted by
// decreasing energy.
std::vector<RidgeGroup> gather(const std::vector<RidgePortion>& rrps, const SlcGrid& slc,
                               std::size_t delta_t);

}  // namespace rrprd
