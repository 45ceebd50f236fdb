#include "rrprd/experiment.hpp"

#include "fft.hpp"
#include "rrprd/csv_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace rrprd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(text), &used);
    if (used != trim(text).size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + text + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v < 0.0 || v != std::floor(v)) throw ConfigError(key + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean_of(const std::vector<long>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void sort_by_frequency(std::vector<Ridge>& ridges) {
  std::stable_sort(ridges.begin(), ridges.end(),
                   [](const Ridge& a, const Ridge& b) { return mean_of(a.bins) < mean_of(b.bins); });
}

std::vector<ModeSpec> sorted_modes(std::vector<ModeSpec> modes, std::size_t L) {
  std::vector<double> mean(modes.size());
  for (std::size_t p = 0; p < modes.size(); ++p) {
    const auto f = sampled_inst_freq(modes[p], L);
    mean[p] = std::accumulate(f.begin(), f.end(), 0.0);
  }
  std::vector<std::size_t> order(modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] < mean[b]; });
  std::vector<ModeSpec> out;
  for (std::size_t i : order) out.push_back(modes[i]);
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("RRPRD_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

bool ExperimentConfig::has(const std::string& method) const {
  return std::find(methods.begin(), methods.end(), method) != methods.end();
}

void ExperimentConfig::validate() const {
  for (const auto& m : methods) {
    if (std::find(kDetectors.begin(), kDetectors.end(), m) == kDetectors.end() &&
        std::find(kReconstructors.begin(), kReconstructors.end(), m) == kReconstructors.end()) {
      throw ConfigError("unknown method '" + m + "'");
    }
  }
  if (methods.empty()) throw ConfigError("no methods selected");
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset) == names.end()) throw ConfigError("unknown preset '" + preset + "'");
  if (length < 16) throw ConfigError("length must be >= 16");
  if (bins < 8) throw ConfigError("bins must be >= 8");
  if (sigma && !(*sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (delta_hz && !(*delta_hz > 0.0)) throw ConfigError("delta_hz must be > 0");
  if (!(bound_hz >= 0.0)) throw ConfigError("bound_hz must be >= 0");
  if (slack_bins < 0) throw ConfigError("slack_bins must be >= 0");
  if (scale < 1) throw ConfigError("scale must be >= 1");
  if (degree < 1) throw ConfigError("degree must be >= 1");
  if (!(tol_bins > 0.0)) throw ConfigError("tol_bins must be > 0");
  if (init_stride < 1) throw ConfigError("init_stride must be >= 1");
  if (init_count < 1) throw ConfigError("init_count must be >= 1");
  if (snr_grid.empty()) throw ConfigError("empty SNR grid");
  if (runs < 1) throw ConfigError("runs must be >= 1");
}

std::optional<double> parse_sigma(const std::string& text) {
  const std::string t = trim(text);
  if (t == "renyi" || t.empty()) return std::nullopt;
  const double v = to_double("sigma", t);
  if (!(v > 0.0)) throw ConfigError("sigma must be > 0");
  return v;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!trim(tok).empty()) out.push_back(to_double("list", tok));
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!trim(tok).empty()) out.push_back(trim(tok));
  }
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, node] : body) {
      const std::string v = node.get_value<std::string>();
      const std::string k = section + "." + key;
      if (k == "signal.preset") cfg.preset = trim(v);
      else if (k == "signal.length") cfg.length = to_count(k, v);
      else if (k == "signal.bins") cfg.bins = to_count(k, v);
      else if (k == "signal.sigma") cfg.sigma = parse_sigma(v);
      else if (k == "signal.sigma_candidates") cfg.sigma_candidates = to_count(k, v);
      else if (k == "method.methods") cfg.methods = parse_name_list(v);
      else if (k == "method.bound_hz") cfg.bound_hz = to_double(k, v);
      else if (k == "method.slack_bins") cfg.slack_bins = static_cast<long>(to_count(k, v));
      else if (k == "method.delta_hz") cfg.delta_hz = to_double(k, v);
      else if (k == "method.delta_t") cfg.delta_t = to_count(k, v);
      else if (k == "method.scale") cfg.scale = to_count(k, v);
      else if (k == "method.degree") cfg.degree = to_count(k, v);
      else if (k == "method.tol_bins") cfg.tol_bins = to_double(k, v);
      else if (k == "method.init_stride") cfg.init_stride = to_count(k, v);
      else if (k == "method.init_count") cfg.init_count = to_count(k, v);
      else if (k == "method.maxima") {
        if (trim(v) == "slc") cfg.maxima = MaximaSource::Slc;
        else if (trim(v) == "magnitude") cfg.maxima = MaximaSource::Magnitude;
        else throw ConfigError("method.maxima must be slc or magnitude");
      } else if (k == "bench.snr") cfg.snr_grid = parse_number_list(v);
      else if (k == "bench.runs") cfg.runs = to_count(k, v);
      else if (k == "bench.seed") cfg.seed = static_cast<std::uint64_t>(to_count(k, v));
      else if (k == "bench.out") cfg.out_dir = trim(v);
      else throw ConfigError("unknown config key '" + k + "'");
    }
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"two_linear", "two_cosine", "linear_exp", "linear", "cosine", "exponential", "tone"};
}

std::vector<ModeSpec> preset_modes(const std::string& name) {
  if (name == "two_linear") return {linear_chirp(250.0, 1500.0), linear_chirp(800.0, 2500.0)};
  if (name == "two_cosine") return {cosine_mode(900.0, 150.0, 2.0), cosine_mode(2400.0, 400.0, 3.0)};
  if (name == "linear_exp") return {linear_chirp(300.0, 1200.0), exponential_mode(1800.0, 1.8)};
  if (name == "linear") return {linear_chirp(500.0, 2500.0)};
  if (name == "cosine") return {cosine_mode(2000.0, 500.0, 2.0)};
  if (name == "exponential") return {exponential_mode(500.0, 6.0)};
  if (name == "tone") return {linear_chirp(1000.0, 0.0)};
  throw ConfigError("unknown preset '" + name + "'");
}

double choose_sigma(const Signal& clean, const ExperimentConfig& cfg) {
  if (cfg.sigma) return *cfg.sigma;
  const std::size_t L = clean.length();
  // Largest sigma whose window support 2M+1 fits in N.
  double hi = static_cast<double>(cfg.bins - 1) / (2.0 * static_cast<double>(L) * std::sqrt(std::log(1e6) / std::numbers::pi));
  while (hi > 0.0 && 2 * required_half_support(hi, L) + 1 > cfg.bins) hi *= 0.995;
  const double lo = hi / 16.0;
  return select_sigma_renyi(clean, geometric_grid(lo, hi, std::max<std::size_t>(cfg.sigma_candidates, 2)), cfg.bins);
}

Analysis analyze(const Signal& noisy, std::size_t num_modes, double sigma, const ExperimentConfig& cfg,
                 FitFamily family) {
  Analysis a;
  a.sigma = sigma;
  const WindowSet w = make_windows(sigma, noisy.length(), cfg.bins);
  a.grid = stft(noisy, w);
  a.qhat = modulation_estimate(noisy, w);
  a.slc = compute_slc(a.grid, a.qhat, sigma);

  PeelOptions po;
  po.num_modes = num_modes;
  po.delta_hz = cfg.delta_hz.value_or(3.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma));
  po.init_count = cfg.init_count;

  if (cfg.has("S-RD") || cfg.has("S-MR")) {
    try {
      a.srd = detect_srd(a.grid, cfg.bound_hz, po);
      sort_by_frequency(a.srd);
      a.srd_ok = a.srd.size() == num_modes;
    } catch (const std::invalid_argument&) {
      a.srd_ok = false;
    }
  }
  if (cfg.has("MB-RD") || cfg.has("MB-MR")) {
    try {
      a.mbrd = detect_mbrd(a.grid, a.qhat, cfg.slack_bins, po);
      sort_by_frequency(a.mbrd);
      a.mbrd_ok = a.mbrd.size() == num_modes;
    } catch (const std::invalid_argument&) {
      a.mbrd_ok = false;
    }
  }
  if (cfg.has("RRP-RD") || cfg.has("RRP-MR") || cfg.has("RRP-MR-LCR")) {
    RrpOptions ro;
    ro.num_modes = num_modes;
    ro.scale = cfg.scale;
    ro.init_stride = cfg.init_stride;
    ro.margin = w.M;
    ro.maxima = cfg.maxima;
    a.rrps = extract_rrps(a.slc, a.qhat, ro);
    a.groups = gather(a.rrps, a.slc, cfg.delta_t);
    if (!a.groups.empty()) {
      FitOptions fo;
      fo.num_modes = num_modes;
      fo.degree = cfg.degree;
      fo.tol_bins = cfg.tol_bins;
      a.fit = family == FitFamily::Spline ? fit_spline_ridge(a.groups, a.slc, fo)
                                          : fit_polynomial_ridges(a.groups, a.slc, fo);
      a.rrp_ok = a.fit.complete && a.fit.models.size() == num_modes;
    }
  }
  return a;
}

std::vector<std::vector<double>> ridge_inst_freq(const std::vector<Ridge>& ridges, std::size_t L, std::size_t N) {
  std::vector<Ridge> sorted = ridges;
  sort_by_frequency(sorted);
  const double to_hz = static_cast<double>(L) / static_cast<double>(N);
  std::vector<std::vector<double>> out;
  for (const auto& r : sorted) {
    std::vector<double> f(r.bins.size());
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = static_cast<double>(r.bins[n]) * to_hz;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::vector<double>> model_inst_freq(const FitResult& fit, std::size_t L, std::size_t N) {
  const double to_hz = static_cast<double>(L) / static_cast<double>(N);
  std::vector<std::vector<double>> out;
  for (const auto& m : fit.models) {
    std::vector<double> f(L);
    for (std::size_t n = 0; n < L; ++n) f[n] = m.curve.value(static_cast<double>(n) / static_cast<double>(L)) * to_hz;
    out.push_back(std::move(f));
  }
  return out;
}

double trimmed_snr(std::span<const double> ref, std::span<const double> est, std::size_t trim) {
  const std::size_t L = std::min(ref.size(), est.size());
  if (2 * trim >= L) trim = 0;
  return snr_db(ref.subspan(trim, L - 2 * trim), est.subspan(trim, L - 2 * trim));
}

double trimmed_snr(const Signal& ref, const Signal& est, std::size_t trim) {
  const std::size_t L = std::min(ref.length(), est.length());
  if (2 * trim >= L) trim = 0;
  Signal r(std::vector<cplx>(ref.samples.begin() + static_cast<long>(trim), ref.samples.begin() + static_cast<long>(L - trim)));
  Signal e(std::vector<cplx>(est.samples.begin() + static_cast<long>(trim), est.samples.begin() + static_cast<long>(L - trim)));
  return snr_db(r, e);
}

std::uint64_t realization_seed(std::uint64_t base, std::size_t snr_index, std::size_t run) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + (static_cast<std::uint64_t>(snr_index) << 32) +
                    static_cast<std::uint64_t>(run) + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records) {
  std::vector<BenchSummary> out;
  std::map<std::tuple<std::string, std::size_t, double>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.method, r.mode, r.input_snr);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(BenchSummary{r.method, r.mode, r.input_snr, 0.0, 0, 0});
    }
    BenchSummary& s = out[it->second];
    if (r.failed) {
      ++s.failures;
    } else {
      s.mean_output_snr += r.output_snr;
      ++s.count;
    }
  }
  for (auto& s : out) s.mean_output_snr = s.count ? s.mean_output_snr / static_cast<double>(s.count) : kNaN;
  return out;
}

double mean_over_modes(const std::vector<BenchSummary>& summary, const std::string& method, double snr) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& s : summary) {
    if (s.method == method && s.input_snr == snr) {
      acc += s.mean_output_snr;
      ++n;
    }
  }
  return n ? acc / static_cast<double>(n) : kNaN;
}

namespace {

void write_bench(const ExperimentConfig& cfg, const BenchResult& res) {
  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream os(cfg.out_dir / "bench_records.csv");
    if (!os) throw DataError("cannot write into " + cfg.out_dir.string());
    os << std::setprecision(12);
    os << "# schema: bench_records/1\n";
    os << "# preset=" << cfg.preset << " L=" << cfg.length << " N=" << cfg.bins << " sigma=" << res.sigma << "\n";
    os << "method,mode,input_snr_db,output_snr_db,output_snr_untrimmed_db,seed,failed\n";
    for (const auto& r : res.records) {
      os << r.method << "," << r.mode << "," << r.input_snr << "," << r.output_snr << "," << r.output_snr_untrimmed
         << "," << r.seed << "," << (r.failed ? 1 : 0) << "\n";
    }
  }
  {
    std::ofstream os(cfg.out_dir / "bench_summary.csv");
    os << std::setprecision(12);
    os << "# schema: bench_summary/1\n";
    os << "method,mode,input_snr_db,mean_output_snr_db,count,failures\n";
    for (const auto& s : res.summary) {
      os << s.method << "," << s.mode << "," << s.input_snr << "," << s.mean_output_snr << "," << s.count << ","
         << s.failures << "\n";
    }
  }
  {
    // Wall times vary between runs, so they live apart from the deterministic tables.
    std::ofstream os(cfg.out_dir / "bench_timing.csv");
    os << std::setprecision(6);
    os << "# schema: bench_timing/1\n";
    os << "method,mode,input_snr_db,seed,wall_seconds\n";
    for (const auto& r : res.records) {
      os << r.method << "," << r.mode << "," << r.input_snr << "," << r.seed << "," << r.wall_seconds << "\n";
    }
  }
}

std::vector<BenchRecord> bench_realization(const ExperimentConfig& cfg, const std::vector<ModeSpec>& modes,
                                           const Signal& clean, const std::vector<Signal>& clean_modes,
                                           double sigma, double snr, std::uint64_t seed) {
  const std::size_t L = cfg.length;
  const std::size_t N = cfg.bins;
  const std::size_t P = modes.size();
  const std::size_t trim = make_windows(sigma, L, N).M;
  const Signal noisy = add_noise(clean, snr, seed);

  const auto t0 = std::chrono::steady_clock::now();
  const Analysis a = analyze(noisy, P, sigma, cfg);
  const double t_analysis = seconds_since(t0);

  std::vector<BenchRecord> out;
  auto emit = [&](const std::string& method, bool ok, const auto& score, double seconds) {
    for (std::size_t p = 0; p < P; ++p) {
      BenchRecord r;
      r.method = method;
      r.mode = p;
      r.input_snr = snr;
      r.seed = seed;
      r.wall_seconds = seconds;
      r.failed = !ok;
      if (ok) {
        r.output_snr = score(p, trim);
        r.output_snr_untrimmed = score(p, std::size_t{0});
      } else {
        r.output_snr = r.output_snr_untrimmed = kNaN;
      }
      out.push_back(std::move(r));
    }
  };

  std::vector<std::vector<double>> true_if;
  for (const auto& m : modes) true_if.push_back(sampled_inst_freq(m, L));
  auto if_score = [&](const std::vector<std::vector<double>>& est) {
    return [&true_if, est](std::size_t p, std::size_t tr) { return trimmed_snr(true_if[p], est[p], tr); };
  };
  auto sig_score = [&](std::vector<ModeEstimate> est) {
    return [&clean_modes, est = std::move(est)](std::size_t p, std::size_t tr) {
      return trimmed_snr(clean_modes[p], est[p], tr);
    };
  };

  for (const auto& method : cfg.methods) {
    const auto t1 = std::chrono::steady_clock::now();
    if (method == "S-RD") {
      emit(method, a.srd_ok, if_score(a.srd_ok ? ridge_inst_freq(a.srd, L, N) : std::vector<std::vector<double>>{}), t_analysis);
    } else if (method == "MB-RD") {
      emit(method, a.mbrd_ok, if_score(a.mbrd_ok ? ridge_inst_freq(a.mbrd, L, N) : std::vector<std::vector<double>>{}), t_analysis);
    } else if (method == "RRP-RD") {
      emit(method, a.rrp_ok, if_score(a.rrp_ok ? model_inst_freq(a.fit, L, N) : std::vector<std::vector<double>>{}), t_analysis);
    } else if (method == "S-MR") {
      auto est = a.srd_ok ? reconstruct_classic(a.grid, a.srd, a.qhat, sigma) : std::vector<ModeEstimate>{};
      emit(method, a.srd_ok, sig_score(std::move(est)), t_analysis + seconds_since(t1));
    } else if (method == "MB-MR") {
      auto est = a.mbrd_ok ? reconstruct_classic(a.grid, a.mbrd, a.qhat, sigma) : std::vector<ModeEstimate>{};
      emit(method, a.mbrd_ok, sig_score(std::move(est)), t_analysis + seconds_since(t1));
    } else if (method == "RRP-MR") {
      auto est = a.rrp_ok ? reconstruct_band(a.grid, a.fit.bands) : std::vector<ModeEstimate>{};
      emit(method, a.rrp_ok, sig_score(std::move(est)), t_analysis + seconds_since(t1));
    } else if (method == "RRP-MR-LCR") {
      std::vector<ModeEstimate> est;
      if (a.rrp_ok) {
        std::vector<RidgeCurve> curves;
        for (const auto& m : a.fit.models) curves.push_back(m.curve);
        est = reconstruct_lcr(a.grid, curves, sigma).modes;
      }
      emit(method, a.rrp_ok, sig_score(std::move(est)), t_analysis + seconds_since(t1));
    }
  }
  return out;
}

}  // namespace

BenchResult run_bench(const ExperimentConfig& cfg, bool write) {
  cfg.validate();
  const auto modes = sorted_modes(preset_modes(cfg.preset), cfg.length);
  Signal clean;
  try {
    clean = synthesize(modes, cfg.length);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("preset does not fit the signal length: ") + e.what());
  }
  std::vector<Signal> clean_modes;
  for (const auto& m : modes) clean_modes.push_back(synthesize_mode(m, cfg.length));

  BenchResult res;
  res.sigma = choose_sigma(clean, cfg);

  const std::size_t jobs = cfg.snr_grid.size() * cfg.runs;
  std::vector<std::vector<BenchRecord>> per_job(jobs);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      const std::size_t i = j / cfg.runs;
      const std::size_t r = j % cfg.runs;
      try {
        per_job[j] = bench_realization(cfg, modes, clean, clean_modes, res.sigma, cfg.snr_grid[i],
                                       realization_seed(cfg.seed, i, r));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(worker_count(), jobs);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  for (auto& recs : per_job) {
    for (auto& r : recs) res.records.push_back(std::move(r));
  }
  res.summary = summarize(res.records);
  if (write) write_bench(cfg, res);
  return res;
}

Analysis run_demo(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto modes = sorted_modes(preset_modes(cfg.preset), cfg.length);
  Signal clean;
  try {
    clean = synthesize(modes, cfg.length);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("preset does not fit the signal length: ") + e.what());
  }
  const double sigma = choose_sigma(clean, cfg);
  const Signal noisy = add_noise(clean, cfg.snr_grid.front(), realization_seed(cfg.seed, 0, 0));
  Analysis a = analyze(noisy, modes.size(), sigma, cfg);

  const auto& out = cfg.out_dir;
  csv::write_magnitude(out / "spectrogram_magnitude.csv", a.grid.values);
  csv::write_portions(out / "rrps.csv", a.rrps, a.slc);
  csv::write_groups(out / "groups.csv", a.groups, a.slc);
  csv::write_models(out / "curves.csv", a.fit, cfg.length, cfg.bins);
  csv::write_model_coefficients(out / "curve_coefficients.txt", a.fit);
  if (a.srd_ok) csv::write_ridges(out / "ridges_srd.csv", a.srd, cfg.length, cfg.bins);
  if (a.mbrd_ok) csv::write_ridges(out / "ridges_mbrd.csv", a.mbrd, cfg.length, cfg.bins);
  {
    std::ofstream os(out / "true_if.csv");
    os << std::setprecision(12) << "# schema: true_if/1\nmode,n,frequency_hz\n";
    for (std::size_t p = 0; p < modes.size(); ++p) {
      const auto f = sampled_inst_freq(modes[p], cfg.length);
      for (std::size_t n = 0; n < f.size(); ++n) os << p << "," << n << "," << f[n] << "\n";
    }
  }
  return a;
}

std::vector<double> normalize_strain(std::vector<double> x) {
  if (x.empty()) throw DataError("empty strain series");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double peak = 0.0;
  for (double& v : x) {
    v -= mean;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
  return x;
}

Signal analytic_signal(std::span<const double> x) {
  const std::size_t L = x.size();
  detail::Fft fwd(L, true);
  detail::Fft inv(L, false);
  auto b = fwd.buffer();
  for (std::size_t n = 0; n < L; ++n) b[n] = x[n];
  fwd.execute();
  auto c = inv.buffer();
  for (std::size_t k = 0; k < L; ++k) {
    double h = 0.0;
    if (k == 0 || (L % 2 == 0 && k == L / 2)) h = 1.0;
    else if (k < (L + 1) / 2) h = 2.0;
    c[k] = b[k] * h;
  }
  inv.execute();
  Signal z(L);
  for (std::size_t n = 0; n < L; ++n) z[n] = c[n] / static_cast<double>(L);
  return z;
}

std::vector<double> read_series(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  try {
    rows = csv::read_table(path);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  if (rows.empty()) throw DataError("no samples in " + path.string());
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.size() > 2) throw DataError("expected one or two columns in " + path.string());
    out.push_back(r.back());
  }
  return out;
}

double ls_amplitude(std::span<const double> ref, std::span<const double> est) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < std::min(ref.size(), est.size()); ++n) {
    num += ref[n] * est[n];
    den += est[n] * est[n];
  }
  return den > 0.0 ? num / den : 0.0;
}

GwReport run_gw(const GwOptions& opt) {
  if (opt.tols.empty()) throw ConfigError("no tol values");
  for (double t : opt.tols) {
    if (!(t > 0.0)) throw ConfigError("tol must be > 0");
  }
  const std::vector<double> strain = normalize_strain(read_series(opt.strain_path));
  std::optional<std::vector<double>> nr;
  if (opt.nr_path) nr = normalize_strain(read_series(*opt.nr_path));

  const std::size_t L = strain.size();
  ExperimentConfig cfg = opt.method;
  cfg.bins = opt.bins;
  cfg.length = L;
  cfg.methods = {"RRP-RD", "RRP-MR", "RRP-MR-LCR"};
  const Signal z = analytic_signal(strain);

  GwReport rep;
  rep.length = L;
  rep.preprocessing = "mean removal, peak normalization, analytic signal from the one-sided spectrum; no whitening or band-pass";
  cfg.sigma = opt.sigma;
  // Without a clean reference the entropy criterion is evaluated on the data itself.
  rep.sigma = choose_sigma(z, cfg);
  if (2 * make_windows(rep.sigma, L, cfg.bins).M + 1 > L) throw DataError("series shorter than the window support");

  const auto& out = opt.out_dir;
  bool wrote_stft = false;
  for (double tol : opt.tols) {
    cfg.tol_bins = tol;
    const Analysis a = analyze(z, 1, rep.sigma, cfg, FitFamily::Spline);
    if (!wrote_stft) {
      csv::write_magnitude(out / "stft_magnitude.csv", a.grid.values);
      csv::write_portions(out / "rrps.csv", a.rrps, a.slc);
      wrote_stft = true;
    }
    std::ostringstream tag;
    tag << "tol" << tol;
    rep.tols.push_back(tol);
    if (!a.rrp_ok) {
      rep.mr_snr.push_back(kNaN);
      rep.lcr_snr.push_back(kNaN);
      rep.fits.push_back(a.fit);
      continue;
    }
    csv::write_models(out / ("curve_" + tag.str() + ".csv"), a.fit, L, cfg.bins);
    csv::write_model_coefficients(out / ("curve_" + tag.str() + ".txt"), a.fit);
    const auto mr = reconstruct_band(a.grid, a.fit.bands);
    const auto lcr = reconstruct_lcr(a.grid, {a.fit.models.front().curve}, rep.sigma, ChirpUnits::Hz, true);
    csv::write_magnitude(out / ("denoised_stft_" + tag.str() + ".csv"), lcr.synthesized);

    auto real_part = [](const Signal& s) {
      std::vector<double> r(s.length());
      for (std::size_t n = 0; n < r.size(); ++n) r[n] = s[n].real();
      return r;
    };
    const auto mr_real = real_part(mr.front());
    const auto lcr_real = real_part(lcr.modes.front());
    csv::write_real_series(out / ("rrp_mr_" + tag.str() + ".csv"), mr_real);
    csv::write_real_series(out / ("rrp_mr_lcr_" + tag.str() + ".csv"), lcr_real);
    auto score = [&](const std::vector<double>& est) {
      if (!nr) return kNaN;
      const std::size_t n = std::min(nr->size(), est.size());
      std::span<const double> ref(nr->data(), n);
      std::vector<double> scaled(est.begin(), est.begin() + static_cast<long>(n));
      const double amp = ls_amplitude(ref, scaled);
      for (double& v : scaled) v *= amp;
      return snr_db(ref, scaled);
    };
    rep.mr_snr.push_back(score(mr_real));
    rep.lcr_snr.push_back(score(lcr_real));
    rep.fits.push_back(a.fit);
  }

  std::filesystem::create_directories(out);
  std::ofstream os(out / "gw_report.csv");
  os << std::setprecision(10);
  os << "# schema: gw_report/1\n";
  os << "# preprocessing: " << rep.preprocessing << "\n";
  os << "# L=" << L << " N=" << cfg.bins << " sigma=" << rep.sigma << "\n";
  os << "method,tol_bins,snr_db\n";
  for (std::size_t i = 0; i < rep.tols.size(); ++i) {
    os << "RRP-MR," << rep.tols[i] << "," << rep.mr_snr[i] << "\n";
    os << "RRP-MR-LCR," << rep.tols[i] << "," << rep.lcr_snr[i] << "\n";
  }
  return rep;
}

}  // namespace rrprd
