#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rrprd/experiment.hpp"
#include "rrprd/ridge_fit.hpp"
#include "rrprd/signal.hpp"
#include "rrprd/tfr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace rrprd;

namespace {

constexpr std::size_t kL = 1024;
constexpr std::size_t kN = 256;

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.length = kL;
  cfg.bins = kN;
  cfg.methods = {"RRP-RD"};
  return cfg;
}

double rms_interior_error(const RidgeCurve& c, const ModeSpec& m, std::size_t trim) {
  double acc = 0.0;
  for (std::size_t n = trim; n + trim < kL; ++n) {
    const double t = static_cast<double>(n) / kL;
    acc += std::pow(c.value(t) - m.inst_freq(t) * kN / kL, 2);
  }
  return std::sqrt(acc / static_cast<double>(kL - 2 * trim));
}

double max_interior_error(const RidgeCurve& c, const ModeSpec& m, std::size_t trim) {
  double worst = 0.0;
  for (std::size_t n = trim; n + trim < kL; ++n) {
    const double t = static_cast<double>(n) / kL;
    worst = std::max(worst, std::abs(c.value(t) - m.inst_freq(t) * kN / kL));
  }
  return worst;
}

std::vector<RidgeCurve> curves_of(const FitResult& fit) {
  std::vector<RidgeCurve> out;
  for (const auto& m : fit.models) out.push_back(m.curve);
  return out;
}

}  // namespace

TEST_CASE("noiseless two-mode signal is fitted within one bin") {
  const std::vector<ModeSpec> modes{linear_chirp(100.0, 200.0), linear_chirp(500.0, 300.0)};
  const Signal f = synthesize(modes, kL);
  const double sigma = 0.05;
  const auto a = analyze(f, 2, sigma, small_config());
  REQUIRE(a.rrp_ok);
  REQUIRE(a.fit.models.size() == 2);
  const std::size_t M = a.grid.window.M;
  CHECK(max_interior_error(a.fit.models[0].curve, modes[0], M) < 1.0);
  CHECK(max_interior_error(a.fit.models[1].curve, modes[1], M) < 1.0);
  CHECK(curves_disjoint(curves_of(a.fit), kL));
  CHECK_FALSE(a.fit.intersecting);

  // The incumbent energy never decreases across acceptances.
  const auto& e = a.fit.accepted_energies;
  REQUIRE_FALSE(e.empty());
  CHECK(e.front() == doctest::Approx(a.fit.initial_energy));
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] >= e[i - 1]);
  CHECK(a.fit.energy == doctest::Approx(curves_energy(curves_of(a.fit), a.slc)));
}

TEST_CASE("noisy fits stay ordered and non-intersecting") {
  const std::vector<ModeSpec> modes{linear_chirp(100.0, 200.0), linear_chirp(500.0, 300.0)};
  const Signal clean = synthesize(modes, kL);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = analyze(add_noise(clean, -5.0, seed), 2, 0.05, small_config());
    if (!a.fit.complete) continue;
    if (!a.fit.intersecting) CHECK(curves_disjoint(curves_of(a.fit), kL));
    for (std::size_t i = 1; i < a.fit.accepted_energies.size(); ++i) {
      CHECK(a.fit.accepted_energies[i] >= a.fit.accepted_energies[i - 1]);
    }
    // Every group belongs to at most one mode.
    std::vector<int> owner(a.groups.size(), 0);
    for (const auto& m : a.fit.models) {
      for (std::size_t g : m.groups) ++owner[g];
    }
    for (int c : owner) CHECK(c <= 1);
  }
}

TEST_CASE("curve fit is invariant to scaling the score") {
  const Signal f = add_noise(synthesize({linear_chirp(100.0, 200.0), linear_chirp(500.0, 300.0)}, kL), 0.0, 4);
  const auto a = analyze(f, 2, 0.05, small_config());
  REQUIRE(a.fit.complete);
  SlcGrid scaled = a.slc;
  for (auto& v : scaled.s_lc.data()) v *= 1000.0;
  for (auto& v : scaled.power.data()) v *= 1000.0;
  const auto groups = gather(a.rrps, scaled, small_config().delta_t);
  FitOptions fo;
  fo.num_modes = 2;
  const auto fit = fit_polynomial_ridges(groups, scaled, fo);
  REQUIRE(fit.models.size() == a.fit.models.size());
  for (std::size_t p = 0; p < fit.models.size(); ++p) {
    for (double t : {0.1, 0.5, 0.9}) {
      CHECK(fit.models[p].curve.value(t) == doctest::Approx(a.fit.models[p].curve.value(t)).epsilon(1e-8));
    }
  }
  CHECK(fit.energy == doctest::Approx(1000.0 * a.fit.energy));
}

TEST_CASE("spline model follows an exponential chirp") {
  const ModeSpec mode = exponential_mode(60.0, 5.0);  // 60 to 300 Hz
  const Signal f = synthesize({mode}, kL);
  auto cfg = small_config();
  cfg.tol_bins = 1.0;
  const auto a = analyze(f, 1, 0.05, cfg, FitFamily::Spline);
  REQUIRE(a.rrp_ok);
  REQUIRE(a.fit.models.size() == 1);
  CHECK(a.fit.models[0].curve.is_spline());
  // The budget allows a weighted RMS deviation of tol bins from the integer ridge points.
  CHECK(rms_interior_error(a.fit.models[0].curve, mode, a.grid.window.M) <= cfg.tol_bins);
  CHECK(max_interior_error(a.fit.models[0].curve, mode, a.grid.window.M) <= 1.5);
}

TEST_CASE("overlapping bands are split into a partition") {
  BandSet b;
  b.bands = {{{10, 20}, {10, 20}, {5, 8}}, {{15, 30}, {21, 30}, {9, 12}}};
  split_overlaps(b);
  // floor((20 + 15) / 2) = 17
  CHECK(b.bands[0][0].hi == 17);
  CHECK(b.bands[1][0].lo == 18);
  CHECK(b.bands[0][1].hi == 20);
  CHECK(b.bands[1][1].lo == 21);
  CHECK(b.bands[0][2].hi == 8);
  for (std::size_t n = 0; n < 3; ++n) CHECK(b.bands[0][n].hi < b.bands[1][n].lo);
  // Union preserved.
  CHECK(b.bands[0][0].lo == 10);
  CHECK(b.bands[1][0].hi == 30);
}

TEST_CASE("bands of a flat curve have the pure-harmonic width") {
  const double sigma = 0.05;
  const RidgeCurve flat(ChebyshevPolynomial({40.0}));
  const auto bands = ridge_bands({flat}, sigma, kL, kN);
  REQUIRE(bands.modes() == 1);
  const double half = 3.0 / (std::sqrt(2 * std::numbers::pi) * sigma) * kN / kL;
  for (std::size_t n : {0u, 500u, 1023u}) {
    CHECK(bands.bands[0][n].lo == static_cast<long>(std::floor(40.0 - half)));
    CHECK(bands.bands[0][n].hi == static_cast<long>(std::ceil(40.0 + half)));
  }
  // A sloped curve gets the chirp-widened band.
  const RidgeCurve slope(ChebyshevPolynomial({40.0, 10.0}));  // 20 bins per unit time
  CHECK(curve_chirp_rate(slope, 0.5, kL, kN) == doctest::Approx(20.0 * kL / kN));
  CHECK(curve_chirp_rate(slope, 0.5, kL, kN, ChirpUnits::Literal) == doctest::Approx(20.0));
}

TEST_CASE("curve energy and disjointness helpers") {
  SlcGrid slc;
  slc.sigma = 0.05;
  slc.s_lc = Grid<double>(4, 8, 0.0);
  for (std::size_t n = 0; n < 4; ++n) slc.s_lc(n, 3) = 1.0 + static_cast<double>(n);
  slc.power = slc.s_lc;
  const RidgeCurve at3(ChebyshevPolynomial({3.2}));
  const RidgeCurve off(ChebyshevPolynomial({20.0}));
  CHECK(curves_energy({at3}, slc) == doctest::Approx(10.0));
  CHECK(curves_energy({off}, slc) == doctest::Approx(0.0));
  CHECK(curves_disjoint({at3, off}, 4));
  CHECK_FALSE(curves_disjoint({off, at3}, 4));
}

TEST_CASE("fit input validation") {
  SlcGrid slc;
  slc.sigma = 0.05;
  slc.s_lc = Grid<double>(16, 8, 1.0);
  slc.power = slc.s_lc;
  RidgeGroup a, b;
  a.points = {{0, 2}, {1, 2}};
  a.energy = 1.0;
  b.points = {{0, 5}, {1, 5}};
  b.energy = 2.0;
  FitOptions fo;
  fo.num_modes = 0;
  CHECK_THROWS(fit_polynomial_ridges({b, a}, slc, fo));
  fo.num_modes = 1;
  CHECK_THROWS(fit_polynomial_ridges({a, b}, slc, fo));  // not sorted by energy
  CHECK_NOTHROW(fit_polynomial_ridges({b, a}, slc, fo));
}
