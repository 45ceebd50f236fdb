#pragma once

#include "rrprd/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rrprd {

// One AM-FM mode A(t) exp(2 i pi phi(t)) over normalized time t in [0, 1).
// Frequencies are in cycles per unit normalized time ("Hz" below), so the
// representable band for a length-L signal is [0, L).
struct ModeSpec {
  std::string name;
  std::function<double(double)> amplitude;   // A(t) > 0
  std::function<double(double)> phase;       // phi(t)
  std::function<double(double)> inst_freq;   // phi'(t) > 0
  std::function<double(double)> chirp_rate;  // phi''(t)
};

// phi'(t) = f0 + rate * t
ModeSpec linear_chirp(double f0, double rate, double amplitude = 1.0);

// phi'(t) = f0 + depth * cos(2 pi freq t)
ModeSpec cosine_mode(double f0, double depth, double freq, double amplitude = 1.0);

// phi'(t) = f0 * base^t
ModeSpec exponential_mode(double f0, double base, double amplitude = 1.0);

// sum_p A_p[n] exp(2 i pi phi_p[n]). Throws std::invalid_argument when a sampled
// IF leaves [0, L) or two modes' IFs touch or cross.
Signal synthesize(const std::vector<ModeSpec>& modes, std::size_t length);

// Single mode, no validation against the other modes.
Signal synthesize_mode(const ModeSpec& mode, std::size_t length);

// Sampled phi'[n] in Hz.
std::vector<double> sampled_inst_freq(const ModeSpec& mode, std::size_t length);

// Minimum over n and adjacent pairs of (phi'_{p+1}[n] - phi'_p[n]), modes taken in
// increasing-IF order. Infinity for fewer than two modes.
double min_if_separation(const std::vector<ModeSpec>& modes, std::size_t length);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

// Adds circular complex Gaussian noise scaled from the exact sample norm of
// `clean`, so that snr_db(clean, result) == target_snr_db up to sampling
// fluctuations of the noise norm. target_snr_db == +inf returns clean as-is.
// Noise is drawn from std::mt19937_64(seed) through a Box-Muller transform so
// outputs are identical across standard libraries.
Signal add_noise(const Signal& clean, double target_snr_db, std::uint64_t seed);

// 20 log10(||reference|| / ||estimate - reference||); +inf when they coincide.
double snr_db(const Signal& reference, const Signal& estimate);
double snr_db(std::span<const double> reference, std::span<const double> estimate);

double l2_norm(const Signal& s);

}  // namespace rrprd
