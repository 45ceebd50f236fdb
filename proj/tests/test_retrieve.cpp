#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rrprd/experiment.hpp"
#include "rrprd/retrieve.hpp"
#include "rrprd/signal.hpp"
#include "rrprd/tfr.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rrprd;

namespace {

constexpr std::size_t kL = 1024;
constexpr std::size_t kN = 256;

BandSet full_band(std::size_t L, std::size_t N, long lo, long hi) {
  BandSet b;
  b.bands.assign(1, std::vector<BinInterval>(L, BinInterval{lo, hi}));
  (void)N;
  return b;
}

// True IF of a linear chirp as a bin curve: bins(t) = (f0 + r t) N / L in the
// Chebyshev basis x = 2t - 1.
RidgeCurve linear_curve(double f0, double rate) {
  const double s = static_cast<double>(kN) / kL;
  return RidgeCurve(ChebyshevPolynomial({s * (f0 + rate / 2.0), s * rate / 2.0}));
}

}  // namespace

TEST_CASE("full band summation equals the inverse transform") {
  std::mt19937 gen(1);
  std::normal_distribution<double> d;
  Signal f(kL);
  for (auto& z : f.samples) z = {d(gen), d(gen)};
  const auto w = make_windows(0.05, kL, kN);
  const TfGrid V = stft(f, w);
  const auto modes = reconstruct_band(V, full_band(kL, kN, 0, kN - 1));
  const Signal inv = istft(V);
  REQUIRE(modes.size() == 1);
  for (std::size_t n = 0; n < kL; ++n) CHECK(std::abs(modes[0][n] - inv[n]) < 1e-12);

  // Empty bands give zero.
  const auto none = reconstruct_band(V, full_band(kL, kN, 5, 4));
  for (const auto& z : none[0].samples) CHECK(z == cplx{});
}

TEST_CASE("band reconstruction is linear in the signal") {
  const auto w = make_windows(0.05, kL, kN);
  const Signal a = add_noise(synthesize({linear_chirp(100.0, 0.0)}, kL), 0.0, 2);
  const Signal b = synthesize({linear_chirp(300.0, 100.0)}, kL);
  Signal sum(kL);
  for (std::size_t n = 0; n < kL; ++n) sum[n] = 2.0 * a[n] - b[n];
  const auto bands = full_band(kL, kN, 20, 60);
  const auto ra = reconstruct_band(stft(a, w), bands)[0];
  const auto rb = reconstruct_band(stft(b, w), bands)[0];
  const auto rs = reconstruct_band(stft(sum, w), bands)[0];
  for (std::size_t n = 0; n < kL; n += 13) CHECK(std::abs(rs[n] - (2.0 * ra[n] - rb[n])) < 1e-10);
}

TEST_CASE("a tone is retrieved from its band") {
  const double sigma = 0.05;
  const Signal f = synthesize({linear_chirp(200.0, 0.0)}, kL);  // bin 50
  const auto w = make_windows(sigma, kL, kN);
  const auto bands = ridge_bands({RidgeCurve(ChebyshevPolynomial({50.0}))}, sigma, kL, kN);
  const auto est = reconstruct_band(stft(f, w), bands);
  // Edges are trimmed where the window runs off the signal.
  CHECK(trimmed_snr(f, est[0], w.M) > 30.0);
}

TEST_CASE("linear-chirp resynthesis is exact at the ridge bin") {
  const cplx v{0.3, -1.2};
  CHECK(std::abs(lcr_coefficient(v, 40, 40, 160.0, 500.0, 0.05, kL, kN) - v) < 1e-14);
  CHECK(std::abs(lcr_coefficient(v, 40, 40, 161.3, -200.0, 0.05, kL, kN) - v) < 1e-14);
  // Away from the ridge the magnitude decays.
  CHECK(std::abs(lcr_coefficient(v, 40, 44, 160.0, 0.0, 0.05, kL, kN)) < std::abs(v));
}

TEST_CASE("resynthesized columns match the transform of a linear chirp") {
  const double sigma = 0.05, f0 = 150.0, rate = 400.0;
  const Signal f = synthesize({linear_chirp(f0, rate)}, kL);
  const auto w = make_windows(sigma, kL, kN);
  const TfGrid V = stft(f, w);
  const RidgeCurve curve = linear_curve(f0, rate);

  for (std::size_t n : {300u, 512u, 700u}) {
    const double t = static_cast<double>(n) / kL;
    const double bin = curve.value(t);
    const long k0 = std::lround(bin);
    const double hz = bin * kL / kN;
    const cplx ref0 = V.values(n, static_cast<std::size_t>(k0));
    for (long k = k0 - 3; k <= k0 + 3; ++k) {
      const cplx est = lcr_coefficient(ref0, k0, k, hz, rate, sigma, kL, kN);
      CHECK(std::abs(est - V.values(n, static_cast<std::size_t>(k))) < 0.02 * std::abs(ref0));
    }
  }

  const auto lcr = reconstruct_lcr(V, {curve}, sigma, ChirpUnits::Hz, true);
  REQUIRE(lcr.modes.size() == 1);
  CHECK(trimmed_snr(f, lcr.modes[0], w.M) > 20.0);
  CHECK(lcr.synthesized.rows() == kL);
}

TEST_CASE("classic bands use the pure-harmonic width when q_hat vanishes") {
  const double sigma = 0.05;
  Ridge r;
  r.bins.assign(kL, 60);
  ModulationGrid q;
  q.q_hat = Grid<double>(kL, kN, 0.0);
  const auto bands = classic_bands({r}, q, sigma, kL, kN);
  const double half = 3.0 / (std::sqrt(2 * std::numbers::pi) * sigma) * kN / kL;
  REQUIRE(bands.modes() == 1);
  CHECK(bands.bands[0][10].lo == static_cast<long>(std::floor(60.0 - half)));
  CHECK(bands.bands[0][10].hi == static_cast<long>(std::ceil(60.0 + half)));

  // Two ridges close together are split at the midpoint; bands keep the input order.
  Ridge r2;
  r2.bins.assign(kL, 64);
  const auto two = classic_bands({r2, r}, q, sigma, kL, kN);
  REQUIRE(two.modes() == 2);
  const long mid = (static_cast<long>(std::ceil(60.0 + half)) + static_cast<long>(std::floor(64.0 - half))) / 2;
  CHECK(two.bands[1][10].hi == mid);
  CHECK(two.bands[0][10].lo == mid + 1);
}
