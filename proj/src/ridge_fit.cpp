#include "rrprd/ridge_fit.hpp"

#include "rrprd/smoothing_spline.hpp"
#include "rrprd/tfr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace rrprd {

double curve_chirp_rate(const RidgeCurve& curve, double t, std::size_t L, std::size_t N, ChirpUnits units) {
  const double d = curve.derivative(t);
  return units == ChirpUnits::Hz ? d * static_cast<double>(L) / static_cast<double>(N) : d;
}

void split_overlaps(BandSet& set) {
  const std::size_t P = set.modes();
  if (P < 2) return;
  const std::size_t L = set.bands.front().size();
  for (std::size_t n = 0; n < L; ++n) {
    for (std::size_t p = 0; p + 1 < P; ++p) {
      BinInterval& lo_band = set.bands[p][n];
      BinInterval& hi_band = set.bands[p + 1][n];
      if (lo_band.empty() || hi_band.empty() || lo_band.hi < hi_band.lo) continue;
      const long first = std::min(lo_band.lo, hi_band.lo);
      const long last = std::max(lo_band.hi, hi_band.hi);
      const long mid = static_cast<long>(std::floor(0.5 * static_cast<double>(lo_band.hi + hi_band.lo)));
      lo_band = BinInterval{first, mid};
      hi_band = BinInterval{mid + 1, last};
    }
  }
}

BandSet ridge_bands(const std::vector<RidgeCurve>& curves, double sigma, std::size_t L, std::size_t N,
                    ChirpUnits units) {
  BandSet out;
  out.bands.assign(curves.size(), std::vector<BinInterval>(L));
  const double to_bins = static_cast<double>(N) / static_cast<double>(L);
  for (std::size_t p = 0; p < curves.size(); ++p) {
    for (std::size_t n = 0; n < L; ++n) {
      const double t = static_cast<double>(n) / static_cast<double>(L);
      const double c = curve_chirp_rate(curves[p], t, L, N, units);
      const double half = 3.0 * linear_chirp_std(sigma, c) * to_bins;
      out.bands[p][n] = bin_interval(curves[p].value(t), half, N);
    }
  }
  split_overlaps(out);
  return out;
}

double curves_energy(const std::vector<RidgeCurve>& curves, const SlcGrid& slc) {
  const std::size_t L = slc.L();
  const long N = static_cast<long>(slc.N());
  double acc = 0.0;
  for (const auto& c : curves) {
    for (std::size_t n = 0; n < L; ++n) {
      const double v = c.value(static_cast<double>(n) / static_cast<double>(L));
      if (!std::isfinite(v)) continue;
      const long k = round_half_away(v);
      if (k < 0 || k >= N) continue;
      acc += slc.s_lc(n, static_cast<std::size_t>(k));
    }
  }
  return acc;
}

bool curves_disjoint(const std::vector<RidgeCurve>& curves, std::size_t L) {
  for (std::size_t p = 0; p + 1 < curves.size(); ++p) {
    for (std::size_t n = 0; n < L; ++n) {
      const double t = static_cast<double>(n) / static_cast<double>(L);
      if (!(curves[p].value(t) < curves[p + 1].value(t))) return false;
    }
  }
  return true;
}

namespace {

enum class Region { PureHarmonic, LinearChirp };

// Explicitly selected groups per mode (core) and everything the regions around
// the fitted curves absorbed on top of them (owner). Absorption is always
// recomputed from the core, so a poor early fit cannot lock in wrong groups.
struct State {
  std::vector<int> core;   // per group: mode index or -1
  std::vector<int> owner;  // core plus absorbed groups
  std::vector<RidgeCurve> curves;
  double energy = 0.0;
};

class Engine {
public:
  Engine(const std::vector<RidgeGroup>& groups, const SlcGrid& slc, const FitOptions& opt,
         const CurveFitter& fitter)
      : groups_(groups), slc_(slc), opt_(opt), fitter_(fitter), L_(slc.L()), N_(slc.N()) {
    double r_max = 0.0;
    for (const auto& g : groups_) r_max = std::max(r_max, g.energy);
    weight_.resize(groups_.size());
    for (std::size_t q = 0; q < groups_.size(); ++q) {
      const double r = r_max > 0.0 ? groups_[q].energy / r_max : 1.0;
      weight_[q] = r > 0.0 ? r * r : std::numeric_limits<double>::min();
    }
    cover_.resize(L_);
    for (std::size_t q = 0; q < groups_.size(); ++q) {
      for (const auto& pt : groups_[q].points) cover_[pt.first].push_back(q);
    }
    ph_half_ = pure_harmonic_half_width(slc.sigma, L_, N_);
  }

  FitResult run() {
    FitResult res;
    if (groups_.empty()) return res;

    State inc;
    std::size_t q0 = 0;
    res.complete = seed(inc, q0);
    evaluate(inc, Region::PureHarmonic, res);
    res.initial_energy = inc.energy;
    res.accepted_energies.push_back(inc.energy);
    snapshots_.push_back(inc);

    scan(inc, Region::PureHarmonic, q0 + 1, res);

    if (opt_.post_process) {
      // Restart from the final curves: everything they gathered becomes core.
      State post = inc;
      post.core = post.owner;
      evaluate(post, Region::LinearChirp, res);
      if (post.energy >= inc.energy) {
        inc = std::move(post);
        res.accepted_energies.push_back(inc.energy);
        snapshots_.push_back(inc);
      }
      scan(inc, Region::LinearChirp, 0, res);
    }

    if (!curves_disjoint(inc.curves, L_)) {
      const State* best = nullptr;
      for (const auto& s : snapshots_) {
        if (curves_disjoint(s.curves, L_) && (!best || s.energy > best->energy)) best = &s;
      }
      if (best) {
        inc = *best;
        res.used_fallback = true;
      } else {
        res.intersecting = true;
      }
    }

    res.energy = inc.energy;
    for (std::size_t p = 0; p < inc.curves.size(); ++p) {
      RidgeModel m;
      m.curve = inc.curves[p];
      for (std::size_t q = 0; q < groups_.size(); ++q) {
        if (inc.owner[q] == static_cast<int>(p)) m.groups.push_back(q);
      }
      res.models.push_back(std::move(m));
    }
    res.bands = ridge_bands(inc.curves, slc_.sigma, L_, N_, opt_.units);
    return res;
  }

private:
  double t_of(std::size_t n) const { return static_cast<double>(n) / static_cast<double>(L_); }

  long bin_at(const RidgeGroup& g, std::size_t n) const {
    const auto it = std::lower_bound(g.points.begin(), g.points.end(), std::pair<std::size_t, long>{n, std::numeric_limits<long>::min()});
    return it != g.points.end() && it->first == n ? it->second : -1;
  }

  // Smallest prefix of the energy-sorted groups holding P groups with a common
  // time index; those groups, ordered by frequency there, seed the modes.
  bool seed(State& s, std::size_t& q0) {
    const std::size_t P = opt_.num_modes;
    s.core.assign(groups_.size(), -1);
    std::vector<std::size_t> count(L_, 0);
    std::size_t best_cover = 0;
    std::size_t best_q = 0;
    for (std::size_t q = 0; q < groups_.size(); ++q) {
      std::vector<std::size_t> hits;
      for (const auto& pt : groups_[q].points) {
        const std::size_t c = ++count[pt.first];
        if (c == P) hits.push_back(pt.first);
        if (c > best_cover) {
          best_cover = c;
          best_q = q;
        }
      }
      if (!hits.empty()) {
        q0 = q;
        assign_seed(s, choose_time(hits, q), q);
        return true;
      }
    }
    // Partial result: the largest simultaneous set available.
    std::vector<std::size_t> hits;
    for (std::size_t n = 0; n < L_; ++n) {
      std::size_t c = 0;
      for (std::size_t g : cover_[n]) c += g <= best_q ? 1 : 0;
      if (c == best_cover) hits.push_back(n);
    }
    q0 = best_q;
    assign_seed(s, choose_time(hits, best_q), best_q);
    return false;
  }

  std::size_t choose_time(const std::vector<std::size_t>& times, std::size_t q_max) const {
    std::size_t best_n = times.front();
    double best_e = -1.0;
    for (std::size_t n : times) {
      double e = 0.0;
      for (std::size_t g : cover_[n]) {
        if (g <= q_max) e += groups_[g].energy;
      }
      if (e > best_e) {
        best_e = e;
        best_n = n;
      }
    }
    return best_n;
  }

  void assign_seed(State& s, std::size_t n, std::size_t q_max) {
    std::vector<std::pair<long, std::size_t>> members;  // (bin at n, group)
    for (std::size_t g : cover_[n]) {
      if (g <= q_max) members.emplace_back(bin_at(groups_[g], n), g);
    }
    std::sort(members.begin(), members.end());
    for (std::size_t p = 0; p < members.size(); ++p) s.core[members[p].second] = static_cast<int>(p);
    s.owner = s.core;
    s.curves.assign(members.size(), RidgeCurve{});
  }

  void refit(State& s) const {
    for (std::size_t p = 0; p < s.curves.size(); ++p) {
      std::vector<double> t, y, w;
      for (std::size_t q = 0; q < groups_.size(); ++q) {
        if (s.owner[q] != static_cast<int>(p)) continue;
        for (const auto& [n, k] : groups_[q].points) {
          t.push_back(t_of(n));
          y.push_back(static_cast<double>(k));
          w.push_back(weight_[q]);
        }
      }
      if (!t.empty()) s.curves[p] = fitter_(t, y, w);
    }
  }

  std::vector<std::vector<BinInterval>> regions(const State& s, Region kind) const {
    std::vector<std::vector<BinInterval>> out(s.curves.size(), std::vector<BinInterval>(L_));
    const double to_bins = static_cast<double>(N_) / static_cast<double>(L_);
    for (std::size_t p = 0; p < s.curves.size(); ++p) {
      for (std::size_t n = 0; n < L_; ++n) {
        const double t = t_of(n);
        const double center = s.curves[p].value(t);
        if (!std::isfinite(center)) continue;
        double half = ph_half_;
        if (kind == Region::LinearChirp) {
          const double c = curve_chirp_rate(s.curves[p], t, L_, N_, opt_.units);
          half = 3.0 * linear_chirp_std(slc_.sigma, c) * to_bins;
        }
        out[p][n] = bin_interval(center, half, N_);
      }
    }
    return out;
  }

  double mean_distance(const RidgeCurve& c, const RidgeGroup& g) const {
    double acc = 0.0;
    for (const auto& [n, k] : g.points) acc += std::abs(static_cast<double>(k) - c.value(t_of(n)));
    return acc / static_cast<double>(g.points.size());
  }

  // Adds every unused group that touches a mode's region to that mode and
  // refits, until no region picks up a new group. Returns the number of rounds.
  std::size_t absorb(State& s, Region kind) const {
    std::size_t rounds = 0;
    for (;;) {
      ++rounds;
      const auto reg = regions(s, kind);
      bool changed = false;
      for (std::size_t q = 0; q < groups_.size(); ++q) {
        if (s.owner[q] >= 0) continue;
        int best_p = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < s.curves.size(); ++p) {
          bool hit = false;
          for (const auto& [n, k] : groups_[q].points) {
            if (reg[p][n].contains(k)) {
              hit = true;
              break;
            }
          }
          if (!hit) continue;
          const double d = mean_distance(s.curves[p], groups_[q]);
          if (d < best_d) {
            best_d = d;
            best_p = static_cast<int>(p);
          }
        }
        if (best_p >= 0) {
          s.owner[q] = best_p;
          changed = true;
        }
      }
      if (!changed) break;
      refit(s);
    }
    return rounds;
  }

  void evaluate(State& s, Region kind, FitResult& res) const {
    s.owner = s.core;
    refit(s);
    res.max_absorption_rounds = std::max(res.max_absorption_rounds, absorb(s, kind));
    s.energy = curves_energy(s.curves, slc_);
  }

  // P-subsets containing q1 whose members share a time index, each listed in
  // increasing frequency at that time; highest total energy first.
  std::vector<std::vector<std::size_t>> candidate_subsets(std::size_t q1) const {
    const std::size_t P = opt_.num_modes;
    if (P == 1) return {{q1}};
    constexpr std::size_t kMaxPartners = 6;
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::vector<std::size_t>> out;
    std::set<std::vector<std::size_t>> partner_sets;
    for (const auto& pt : groups_[q1].points) {
      const std::size_t n = pt.first;
      std::vector<std::size_t> partners;
      for (std::size_t g : cover_[n]) {
        if (g >= q1) break;
        partners.push_back(g);
        if (partners.size() == kMaxPartners) break;
      }
      if (partners.size() + 1 < P || !partner_sets.insert(partners).second) continue;
      std::vector<bool> pick(partners.size(), false);
      std::fill(pick.begin(), pick.begin() + static_cast<long>(P - 1), true);
      do {
        std::vector<std::size_t> subset{q1};
        for (std::size_t i = 0; i < partners.size(); ++i) {
          if (pick[i]) subset.push_back(partners[i]);
        }
        std::vector<std::size_t> key = subset;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) continue;
        std::stable_sort(subset.begin(), subset.end(), [&](std::size_t a, std::size_t b) {
          return bin_at(groups_[a], n) < bin_at(groups_[b], n);
        });
        out.push_back(std::move(subset));
      } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
      double ea = 0.0, eb = 0.0;
      for (std::size_t g : a) ea += groups_[g].energy;
      for (std::size_t g : b) eb += groups_[g].energy;
      return ea > eb;
    });
    if (out.size() > opt_.max_candidates) out.resize(opt_.max_candidates);
    return out;
  }

  void scan(State& inc, Region kind, std::size_t first_q, FitResult& res) {
    const std::size_t P = inc.curves.size();
    for (std::size_t q1 = first_q; q1 < groups_.size(); ++q1) {
      if (inc.core[q1] >= 0) continue;
      State best_cand;
      bool have = false;
      for (const auto& subset : candidate_subsets(q1)) {
        if (subset.size() != P) continue;
        // Members go to modes in frequency order at their shared time.
        State cand = inc;
        bool valid = true;
        for (std::size_t p = 0; p < P; ++p) {
          const int cur = cand.core[subset[p]];
          if (cur >= 0 && cur != static_cast<int>(p)) {
            valid = false;
            break;
          }
          cand.core[subset[p]] = static_cast<int>(p);
        }
        if (!valid) continue;
        evaluate(cand, kind, res);
        if (!have || cand.energy > best_cand.energy) {
          best_cand = std::move(cand);
          have = true;
        }
      }
      if (have && best_cand.energy > inc.energy) {
        inc = std::move(best_cand);
        res.accepted_energies.push_back(inc.energy);
        snapshots_.push_back(inc);
      }
    }
  }

  const std::vector<RidgeGroup>& groups_;
  const SlcGrid& slc_;
  const FitOptions& opt_;
  const CurveFitter& fitter_;
  std::size_t L_;
  std::size_t N_;
  std::vector<double> weight_;
  std::vector<std::vector<std::size_t>> cover_;  // groups present at each time, ascending
  double ph_half_ = 0.0;
  std::vector<State> snapshots_;
};

}  // namespace

FitResult fit_ridges(const std::vector<RidgeGroup>& groups, const SlcGrid& slc, const FitOptions& opt,
                     const CurveFitter& fitter) {
  if (opt.num_modes < 1) throw std::invalid_argument("fit_ridges: P must be >= 1");
  for (std::size_t q = 1; q < groups.size(); ++q) {
    if (groups[q].energy > groups[q - 1].energy) {
      throw std::invalid_argument("fit_ridges: groups must be sorted by decreasing energy");
    }
  }
  Engine engine(groups, slc, opt, fitter);
  return engine.run();
}

FitResult fit_polynomial_ridges(const std::vector<RidgeGroup>& groups, const SlcGrid& slc,
                                const FitOptions& opt) {
  if (opt.degree < 1) throw std::invalid_argument("fit_polynomial_ridges: degree must be >= 1");
  const std::size_t degree = opt.degree;
  return fit_ridges(groups, slc, opt,
                    [degree](std::span<const double> t, std::span<const double> y, std::span<const double> w) {
                      return RidgeCurve(fit_weighted_polynomial(t, y, w, degree));
                    });
}

FitResult fit_spline_ridge(const std::vector<RidgeGroup>& groups, const SlcGrid& slc, const FitOptions& opt) {
  if (groups.empty()) throw std::invalid_argument("fit_spline_ridge: no groups");
  if (!(opt.tol_bins > 0.0)) throw std::invalid_argument("fit_spline_ridge: tol must be > 0");
  FitOptions single = opt;
  single.num_modes = 1;
  const double tol2 = opt.tol_bins * opt.tol_bins;
  return fit_ridges(groups, slc, single,
                    [tol2](std::span<const double> t, std::span<const double> y, std::span<const double> w) {
                      const double budget = tol2 * std::accumulate(w.begin(), w.end(), 0.0);
                      return RidgeCurve(fit_smoothing_spline(t, y, w, budget).spline);
                    });
}

}  // namespace rrprd
