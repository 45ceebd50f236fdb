#include "rrprd/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rrprd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::function<double(double)> constant(double v) {
  return [v](double) { return v; };
}

// Uniform in (0, 1], 53 random bits.
double uniform_open0(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

ModeSpec linear_chirp(double f0, double rate, double amplitude) {
  ModeSpec m;
  m.name = "linear";
  m.amplitude = constant(amplitude);
  m.phase = [f0, rate](double t) { return f0 * t + 0.5 * rate * t * t; };
  m.inst_freq = [f0, rate](double t) { return f0 + rate * t; };
  m.chirp_rate = constant(rate);
  return m;
}

ModeSpec cosine_mode(double f0, double depth, double freq, double amplitude) {
  if (freq <= 0.0) throw std::invalid_argument("cosine_mode: modulation frequency must be > 0");
  ModeSpec m;
  m.name = "cosine";
  m.amplitude = constant(amplitude);
  m.phase = [=](double t) { return f0 * t + depth / (kTwoPi * freq) * std::sin(kTwoPi * freq * t); };
  m.inst_freq = [=](double t) { return f0 + depth * std::cos(kTwoPi * freq * t); };
  m.chirp_rate = [=](double t) { return -depth * kTwoPi * freq * std::sin(kTwoPi * freq * t); };
  return m;
}

ModeSpec exponential_mode(double f0, double base, double amplitude) {
  if (base <= 0.0 || base == 1.0) throw std::invalid_argument("exponential_mode: base must be > 0 and != 1");
  const double lb = std::log(base);
  ModeSpec m;
  m.name = "exponential";
  m.amplitude = constant(amplitude);
  m.phase = [=](double t) { return f0 * std::expm1(lb * t) / lb; };
  m.inst_freq = [=](double t) { return f0 * std::exp(lb * t); };
  m.chirp_rate = [=](double t) { return f0 * lb * std::exp(lb * t); };
  return m;
}

std::vector<double> sampled_inst_freq(const ModeSpec& mode, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t n = 0; n < length; ++n) {
    out[n] = mode.inst_freq(static_cast<double>(n) / static_cast<double>(length));
  }
  return out;
}

Signal synthesize_mode(const ModeSpec& mode, std::size_t length) {
  Signal s(length);
  const double L = static_cast<double>(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) / L;
    // Reduce the phase mod 1 before scaling to keep the argument small.
    const double ph = mode.phase(t);
    const double frac = ph - std::floor(ph);
    s[n] = mode.amplitude(t) * std::polar(1.0, kTwoPi * frac);
  }
  return s;
}

double min_if_separation(const std::vector<ModeSpec>& modes, std::size_t length) {
  if (modes.size() < 2) return std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> ifs;
  for (const auto& m : modes) ifs.push_back(sampled_inst_freq(m, length));
  std::sort(ifs.begin(), ifs.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p + 1 < ifs.size(); ++p) {
    for (std::size_t n = 0; n < length; ++n) sep = std::min(sep, ifs[p + 1][n] - ifs[p][n]);
  }
  return sep;
}

Signal synthesize(const std::vector<ModeSpec>& modes, std::size_t length) {
  if (length < 2) throw std::invalid_argument("synthesize: length must be >= 2");
  const double L = static_cast<double>(length);
  std::vector<std::vector<double>> ifs;
  for (const auto& m : modes) {
    if (!m.amplitude || !m.phase || !m.inst_freq) {
      throw std::invalid_argument("synthesize: mode '" + m.name + "' is missing a function");
    }
    auto f = sampled_inst_freq(m, length);
    for (double v : f) {
      if (!(v >= 0.0 && v < L)) {
        throw std::invalid_argument("synthesize: IF of mode '" + m.name + "' leaves the band [0, L)");
      }
    }
    ifs.push_back(std::move(f));
  }
  for (std::size_t a = 0; a < ifs.size(); ++a) {
    for (std::size_t b = a + 1; b < ifs.size(); ++b) {
      const double d0 = ifs[b][0] - ifs[a][0];
      for (std::size_t n = 0; n < length; ++n) {
        const double d = ifs[b][n] - ifs[a][n];
        if (d == 0.0 || (d > 0.0) != (d0 > 0.0)) {
          throw std::invalid_argument("synthesize: IFs of modes '" + modes[a].name + "' and '" +
                                      modes[b].name + "' cross");
        }
      }
    }
  }

  Signal out(length);
  for (const auto& m : modes) {
    const Signal part = synthesize_mode(m, length);
    for (std::size_t n = 0; n < length; ++n) out[n] += part[n];
  }
  return out;
}

double l2_norm(const Signal& s) {
  double acc = 0.0;
  for (const auto& z : s.samples) acc += std::norm(z);
  return std::sqrt(acc);
}

Signal add_noise(const Signal& clean, double target_snr_db, std::uint64_t seed) {
  if (std::isinf(target_snr_db) && target_snr_db > 0) return clean;
  const double norm = l2_norm(clean);
  if (norm == 0.0) throw std::invalid_argument("add_noise: clean signal is all zero, SNR undefined");

  const std::size_t L = clean.length();
  // E|eps[n]|^2 = noise_power, split evenly between real and imaginary parts.
  const double noise_power = norm * norm / static_cast<double>(L) * std::pow(10.0, -target_snr_db / 10.0);
  const double comp_std = std::sqrt(noise_power / 2.0);

  std::mt19937_64 gen(seed);
  Signal out = clean;
  for (std::size_t n = 0; n < L; ++n) {
    const double u1 = uniform_open0(gen);
    const double u2 = uniform_open0(gen);
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[n] += cplx{comp_std * r * std::cos(kTwoPi * u2), comp_std * r * std::sin(kTwoPi * u2)};
  }
  return out;
}

double snr_db(const Signal& reference, const Signal& estimate) {
  if (reference.length() != estimate.length()) throw std::invalid_argument("snr_db: length mismatch");
  double ref = 0.0;
  double err = 0.0;
  for (std::size_t n = 0; n < reference.length(); ++n) {
    ref += std::norm(reference[n]);
    err += std::norm(estimate[n] - reference[n]);
  }
  if (ref == 0.0) throw std::invalid_argument("snr_db: zero reference");
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref / err);
}

double snr_db(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) throw std::invalid_argument("snr_db: length mismatch");
  double ref = 0.0;
  double err = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    ref += reference[n] * reference[n];
    const double d = estimate[n] - reference[n];
    err += d * d;
  }
  if (ref == 0.0) throw std::invalid_argument("snr_db: zero reference");
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref / err);
}

}  // namespace rrprd
