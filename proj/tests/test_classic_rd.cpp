#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rrprd/classic_rd.hpp"
#include "rrprd/signal.hpp"
#include "rrprd/tfr.hpp"

#include <algorithm>
#include <cmath>

using namespace rrprd;

namespace {

// Largest |ridge - true IF bin| over the interior.
double max_bin_error(const Ridge& r, const ModeSpec& m, std::size_t L, std::size_t N, std::size_t trim) {
  double worst = 0.0;
  for (std::size_t n = trim; n + trim < L; ++n) {
    const double truth = m.inst_freq(static_cast<double>(n) / L) * N / L;
    worst = std::max(worst, std::abs(static_cast<double>(r.bins[n]) - truth));
  }
  return worst;
}

}  // namespace

TEST_CASE("noiseless chirp is tracked within one bin by both detectors") {
  const std::size_t L = 1024, N = 256;
  const ModeSpec mode = linear_chirp(100.0, 300.0);
  const Signal f = synthesize({mode}, L);
  const auto w = make_windows(0.05, L, N);
  const TfGrid V = stft(f, w);
  const auto q = modulation_estimate(f, w);
  PeelOptions opt;
  opt.num_modes = 1;
  opt.delta_hz = 30.0;

  // B_f large enough to cover the rate.
  const auto srd = detect_srd(V, 1e6, opt);
  REQUIRE(srd.size() == 1);
  CHECK(max_bin_error(srd[0], mode, L, N, w.M) <= 1.0);

  const auto mbrd = detect_mbrd(V, q, 1, opt);
  REQUIRE(mbrd.size() == 1);
  CHECK(max_bin_error(mbrd[0], mode, L, N, w.M) <= 1.0);
}

TEST_CASE("two tones are peeled in energy order") {
  const std::size_t L = 512, N = 128;
  // bins 20 and 80; the second one is louder
  const Signal f = synthesize({linear_chirp(80.0, 0.0, 0.5), linear_chirp(320.0, 0.0, 1.0)}, L);
  const auto w = make_windows(0.05, L, N);
  PeelOptions opt;
  opt.num_modes = 2;
  opt.delta_hz = 20.0;
  const auto ridges = detect_srd(stft(f, w), 100.0, opt);
  REQUIRE(ridges.size() == 2);
  for (std::size_t n = 0; n < L; ++n) {
    CHECK(ridges[0].bins[n] == 80);
    CHECK(ridges[1].bins[n] == 20);
  }
}

TEST_CASE("srd steps never exceed the bound") {
  const std::size_t L = 512, N = 128;
  const Signal f = add_noise(synthesize({linear_chirp(60.0, 200.0)}, L), 0.0, 5);
  const auto w = make_windows(0.05, L, N);
  PeelOptions opt;
  opt.delta_hz = 20.0;
  const double bound = 2.0 * L * L / N;  // exactly two bins per step
  CHECK(srd_step_bound(bound, L, N) == 2);
  const auto r = detect_srd(stft(f, w), bound, opt);
  for (std::size_t n = 1; n < L; ++n) CHECK(std::abs(r[0].bins[n] - r[0].bins[n - 1]) <= 2);
}

TEST_CASE("peeling rejects too many modes for the band") {
  const std::size_t L = 256, N = 32;
  const auto w = make_windows(0.02, L, N);
  const TfGrid V = stft(synthesize({linear_chirp(40.0, 0.0)}, L), w);
  PeelOptions opt;
  opt.num_modes = 4;
  opt.delta_hz = 24.0;  // half-width 3 bins, 4 * 7 = 28 < 32
  CHECK_NOTHROW(detect_srd(V, 10.0, opt));
  opt.num_modes = 5;  // 35 >= 32
  CHECK_THROWS_AS(detect_srd(V, 10.0, opt), std::invalid_argument);
  opt.num_modes = 0;
  CHECK_THROWS_AS(detect_srd(V, 10.0, opt), std::invalid_argument);
  CHECK_THROWS_AS(detect_srd(V, 0.0, PeelOptions{}), std::invalid_argument);
}

TEST_CASE("initialization indices span the interior evenly") {
  const auto idx = peeling_init_indices(1000, 100, 5);
  REQUIRE(idx.size() == 5);
  CHECK(idx.front() == 100);
  CHECK(idx.back() == 899);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  const auto one = peeling_init_indices(1000, 100, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 499);
  // Window wider than the signal: fall back to the full range.
  const auto wide = peeling_init_indices(50, 40, 3);
  CHECK(wide.front() == 0);
  CHECK(wide.back() == 49);
}

TEST_CASE("band half-width helpers") {
  CHECK(peel_half_width(10.0, 1024, 256) == 3);  // ceil(2.5)
  CHECK(peel_half_width(8.0, 1024, 256) == 2);
  CHECK(srd_step_bound(10.0, 4096, 512) == 1);
}
