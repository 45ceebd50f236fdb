#include "rrprd/rrp_extract.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace rrprd {

namespace {

std::uint64_t portion_hash(const RidgePortion& p) {
  std::uint64_t h = 1469598103934665603ULL ^ (p.start * 0x9E3779B97F4A7C15ULL);
  for (long b : p.bins) {
    h ^= static_cast<std::uint64_t>(b) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h *= 1099511628211ULL;
  }
  return h;
}

bool canonical_less(const RidgePortion& a, const RidgePortion& b) {
  if (a.start != b.start) return a.start < b.start;
  return a.bins < b.bins;
}

// Nearest local maximum to `target` (ties to the lower bin); index into col.bins or -1.
long nearest_maximum(const ColumnMaxima& col, long target) {
  if (col.bins.empty()) return -1;
  const auto it = std::lower_bound(col.bins.begin(), col.bins.end(), target);
  const long idx = static_cast<long>(it - col.bins.begin());
  if (idx == static_cast<long>(col.bins.size())) return idx - 1;
  if (idx == 0) return 0;
  const long above = col.bins[static_cast<std::size_t>(idx)] - target;
  const long below = target - col.bins[static_cast<std::size_t>(idx - 1)];
  return below <= above ? idx - 1 : idx;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

BinInterval bin_interval(double center, double half_width_bins, std::size_t N) {
  BinInterval iv;
  iv.lo = static_cast<long>(std::floor(center - half_width_bins));
  iv.hi = static_cast<long>(std::ceil(center + half_width_bins));
  iv.lo = std::max(iv.lo, 0L);
  iv.hi = std::min(iv.hi, static_cast<long>(N) - 1);
  return iv;
}

BinInterval slc_interval(long k, double q, double sigma, std::size_t L, std::size_t N) {
  const double half = linear_chirp_std(sigma, q) * static_cast<double>(N) / static_cast<double>(L);
  return bin_interval(static_cast<double>(k), half, N);
}

double pure_harmonic_half_width(double sigma, std::size_t L, std::size_t N) {
  return 3.0 * pure_harmonic_std(sigma) * static_cast<double>(N) / static_cast<double>(L);
}

SlcGrid compute_slc(const TfGrid& grid, const ModulationGrid& qhat, double sigma) {
  const std::size_t L = grid.L();
  const std::size_t N = grid.N();
  if (qhat.q_hat.rows() != L || qhat.q_hat.cols() != N) {
    throw std::invalid_argument("compute_slc: modulation grid dimensions differ from the STFT");
  }
  SlcGrid out;
  out.sigma = sigma;
  out.power = spectrogram(grid);
  out.s_lc = Grid<double>(L, N, 0.0);
  std::vector<double> prefix(N + 1);
  for (std::size_t n = 0; n < L; ++n) {
    const auto pw = out.power.row(n);
    prefix[0] = 0.0;
    for (std::size_t k = 0; k < N; ++k) prefix[k + 1] = prefix[k] + pw[k];
    auto dst = out.s_lc.row(n);
    for (std::size_t k = 0; k < N; ++k) {
      const auto iv = slc_interval(static_cast<long>(k), qhat.q_hat(n, k), sigma, L, N);
      // Direct sum for narrow intervals keeps s_lc >= |V[n,k]|^2 free of cancellation.
      if (iv.hi - iv.lo < 64) {
        double acc = 0.0;
        for (long j = iv.lo; j <= iv.hi; ++j) acc += pw[static_cast<std::size_t>(j)];
        dst[k] = acc;
      } else {
        dst[k] = std::max(prefix[static_cast<std::size_t>(iv.hi + 1)] - prefix[static_cast<std::size_t>(iv.lo)], pw[k]);
      }
    }
  }
  return out;
}

std::vector<long> local_maxima(std::span<const double> column) {
  std::vector<long> out;
  const std::size_t N = column.size();
  std::size_t k = 1;
  while (k + 1 < N) {
    if (column[k] > column[k - 1]) {
      std::size_t j = k;
      while (j + 1 < N && column[j + 1] == column[k]) ++j;
      if (j + 1 < N && column[j + 1] < column[k]) out.push_back(static_cast<long>(k));
      k = j + 1;
    } else {
      ++k;
    }
  }
  return out;
}

std::vector<ColumnMaxima> column_maxima(const SlcGrid& slc, MaximaSource source) {
  const std::size_t L = slc.L();
  std::vector<ColumnMaxima> out(L);
  std::vector<std::uint32_t> order;
  for (std::size_t n = 0; n < L; ++n) {
    auto& col = out[n];
    const auto score = slc.s_lc.row(n);
    col.bins = local_maxima(source == MaximaSource::Slc ? score : slc.power.row(n));
    order.resize(col.bins.size());
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return score[static_cast<std::size_t>(col.bins[a])] > score[static_cast<std::size_t>(col.bins[b])];
    });
    col.rank.resize(col.bins.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) col.rank[order[r]] = r;
  }
  return out;
}

GrowResult grow_portions(const SlcGrid& slc, const ModulationGrid& qhat, std::size_t n0,
                         std::size_t num_modes, const std::vector<ColumnMaxima>& maxima) {
  const std::size_t L = slc.L();
  const double Ld = static_cast<double>(L);
  const double step_scale = static_cast<double>(slc.N()) / (Ld * Ld);
  if (n0 >= L) throw std::invalid_argument("grow_portions: n0 out of range");
  const std::uint32_t keep = static_cast<std::uint32_t>(2 * num_modes + 1);

  GrowResult res;
  res.portions.resize(num_modes);
  const auto& seed_col = maxima[n0];
  std::vector<std::pair<std::uint32_t, long>> seeds;  // (rank, bin)
  for (std::size_t i = 0; i < seed_col.bins.size(); ++i) {
    if (seed_col.rank[i] < num_modes) seeds.emplace_back(seed_col.rank[i], seed_col.bins[i]);
  }
  std::sort(seeds.begin(), seeds.end());
  res.padded = seeds.size() < num_modes;

  for (std::size_t p = 0; p < seeds.size(); ++p) {
    const long seed = seeds[p].second;
    std::vector<long> forward;
    long phi = seed;
    for (std::size_t n = n0; n + 1 < L; ++n) {
      const long psi = phi + round_half_away(qhat.q_hat(n, static_cast<std::size_t>(phi)) * step_scale);
      const auto& col = maxima[n + 1];
      const long idx = nearest_maximum(col, psi);
      if (idx < 0 || col.rank[static_cast<std::size_t>(idx)] >= keep) break;
      phi = col.bins[static_cast<std::size_t>(idx)];
      forward.push_back(phi);
    }
    std::vector<long> backward;
    phi = seed;
    for (std::size_t n = n0; n > 0; --n) {
      const long psi = phi - round_half_away(qhat.q_hat(n, static_cast<std::size_t>(phi)) * step_scale);
      const auto& col = maxima[n - 1];
      const long idx = nearest_maximum(col, psi);
      if (idx < 0 || col.rank[static_cast<std::size_t>(idx)] >= keep) break;
      phi = col.bins[static_cast<std::size_t>(idx)];
      backward.push_back(phi);
    }

    RidgePortion& out = res.portions[p];
    out.origin = n0;
    out.start = n0 - backward.size();
    out.bins.reserve(backward.size() + 1 + forward.size());
    out.bins.assign(backward.rbegin(), backward.rend());
    out.bins.push_back(seed);
    out.bins.insert(out.bins.end(), forward.begin(), forward.end());
    for (std::size_t i = 0; i < out.bins.size(); ++i) {
      out.energy += slc.s_lc(out.start + i, static_cast<std::size_t>(out.bins[i]));
    }
  }
  return res;
}

GrowResult grow_portions(const SlcGrid& slc, const ModulationGrid& qhat, std::size_t n0,
                         std::size_t num_modes, MaximaSource source) {
  return grow_portions(slc, qhat, n0, num_modes, column_maxima(slc, source));
}

std::vector<RidgePortion> extract_rrps(const SlcGrid& slc, const ModulationGrid& qhat,
                                       const RrpOptions& opt) {
  if (opt.scale < 1) throw std::invalid_argument("extract_rrps: scale s must be >= 1");
  if (opt.num_modes < 1) throw std::invalid_argument("extract_rrps: P must be >= 1");
  const std::size_t L = slc.L();
  const std::size_t stride = std::max<std::size_t>(opt.init_stride, 1);
  std::size_t lo = opt.margin;
  std::size_t hi = L > opt.margin + 1 ? L - 1 - opt.margin : 0;
  if (lo > hi) {
    lo = 0;
    hi = L - 1;
  }

  const auto maxima = column_maxima(slc, opt.maxima);

  struct Entry {
    RidgePortion portion;
    std::vector<std::size_t> positions;  // init positions (0, 1, 2, ...) that produced it
  };
  std::vector<Entry> unique;
  std::unordered_multimap<std::uint64_t, std::size_t> index;

  std::size_t pos = 0;
  for (std::size_t n0 = lo; n0 <= hi; n0 += stride, ++pos) {
    auto grown = grow_portions(slc, qhat, n0, opt.num_modes, maxima);
    for (auto& p : grown.portions) {
      if (p.empty()) continue;
      const auto h = portion_hash(p);
      std::size_t id = unique.size();
      auto [first, last] = index.equal_range(h);
      for (auto it = first; it != last; ++it) {
        if (unique[it->second].portion.same_points(p)) {
          id = it->second;
          break;
        }
      }
      if (id == unique.size()) {
        index.emplace(h, id);
        unique.push_back(Entry{std::move(p), {}});
      }
      auto& positions = unique[id].positions;
      if (positions.empty() || positions.back() != pos) positions.push_back(pos);
    }
  }

  std::vector<RidgePortion> out;
  for (auto& e : unique) {
    std::size_t run = 1;
    bool stable = opt.scale == 1;
    for (std::size_t i = 1; i < e.positions.size() && !stable; ++i) {
      run = e.positions[i] == e.positions[i - 1] + 1 ? run + 1 : 1;
      if (run >= opt.scale) stable = true;
    }
    if (stable) out.push_back(std::move(e.portion));
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

std::vector<RidgeGroup> gather(const std::vector<RidgePortion>& rrps, const SlcGrid& slc,
                               std::size_t delta_t) {
  const std::size_t L = slc.L();
  const std::size_t N = slc.N();
  const std::size_t count = rrps.size();
  if (count == 0) return {};

  // Canonical processing order makes the result independent of input order.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rrps[a].same_points(rrps[b])) return false;
    return canonical_less(rrps[a], rrps[b]);
  });

  const double half = pure_harmonic_half_width(slc.sigma, L, N);

  // Neighborhood slabs, bucketed per time index: (lo, hi, canonical id).
  struct Slab {
    long lo;
    long hi;
    std::size_t id;
  };
  std::vector<std::vector<Slab>> slabs(L);
  for (std::size_t c = 0; c < count; ++c) {
    const auto& r = rrps[order[c]];
    if (r.empty()) continue;
    const auto add = [&](std::size_t n, long k) {
      const auto iv = bin_interval(static_cast<double>(k), half, N);
      slabs[n].push_back(Slab{iv.lo, iv.hi, c});
    };
    for (std::size_t i = 0; i < r.bins.size(); ++i) add(r.start + i, r.bins[i]);
    const std::size_t before = std::min(delta_t, r.start);
    for (std::size_t d = 1; d <= before; ++d) add(r.start - d, r.bins.front());
    for (std::size_t d = 1; d <= delta_t && r.end() + d < L; ++d) add(r.end() + d, r.bins.back());
  }

  UnionFind uf(count);
  for (auto& column : slabs) {
    if (column.size() < 2) continue;
    std::sort(column.begin(), column.end(), [](const Slab& a, const Slab& b) {
      return a.lo != b.lo ? a.lo < b.lo : a.id < b.id;
    });
    long block_hi = column.front().hi;
    std::size_t block_id = column.front().id;
    for (std::size_t i = 1; i < column.size(); ++i) {
      if (column[i].lo <= block_hi) {
        uf.unite(block_id, column[i].id);
        block_hi = std::max(block_hi, column[i].hi);
      } else {
        block_hi = column[i].hi;
        block_id = column[i].id;
      }
    }
  }

  std::vector<std::vector<std::size_t>> members(count);  // canonical ids per root
  for (std::size_t c = 0; c < count; ++c) members[uf.find(c)].push_back(c);

  std::vector<RidgeGroup> groups;
  for (std::size_t root = 0; root < count; ++root) {
    const auto& ids = members[root];
    if (ids.empty()) continue;

    // Member priority: own energy, then canonical order.
    std::vector<std::size_t> by_priority = ids;
    std::stable_sort(by_priority.begin(), by_priority.end(), [&](std::size_t a, std::size_t b) {
      return rrps[order[a]].energy > rrps[order[b]].energy;
    });

    std::vector<std::pair<std::size_t, long>> all_points;
    std::unordered_map<std::size_t, long> chosen;
    for (std::size_t c : by_priority) {
      const auto& r = rrps[order[c]];
      for (std::size_t i = 0; i < r.bins.size(); ++i) {
        all_points.emplace_back(r.start + i, r.bins[i]);
        chosen.emplace(r.start + i, r.bins[i]);  // first (highest-priority) member wins
      }
    }
    std::sort(all_points.begin(), all_points.end());
    all_points.erase(std::unique(all_points.begin(), all_points.end()), all_points.end());

    RidgeGroup g;
    for (const auto& [n, k] : all_points) g.energy += slc.s_lc(n, static_cast<std::size_t>(k));
    g.points.assign(chosen.begin(), chosen.end());
    std::sort(g.points.begin(), g.points.end());
    for (std::size_t c : ids) g.members.push_back(order[c]);
    std::sort(g.members.begin(), g.members.end());
    if (!g.points.empty()) groups.push_back(std::move(g));
  }

  std::stable_sort(groups.begin(), groups.end(), [](const RidgeGroup& a, const RidgeGroup& b) {
    if (a.energy != b.energy) return a.energy > b.energy;
    return a.points < b.points;
  });
  return groups;
}

}  // namespace rrprd
