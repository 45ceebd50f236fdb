#pragma once

#include "rrprd/classic_rd.hpp"
#include "rrprd/retrieve.hpp"
#include "rrprd/ridge_fit.hpp"
#include "rrprd/rrp_extract.hpp"
#include "rrprd/signal.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrprd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kDetectors{"S-RD", "MB-RD", "RRP-RD"};
inline const std::vector<std::string> kReconstructors{"S-MR", "MB-MR", "RRP-MR", "RRP-MR-LCR"};

struct ExperimentConfig {
  std::string preset = "two_linear";
  std::vector<std::string> methods{"S-RD", "MB-RD", "RRP-RD", "S-MR", "MB-MR", "RRP-MR", "RRP-MR-LCR"};

  std::size_t length = 4096;          // L
  std::size_t bins = 512;             // N
  std::optional<double> sigma;        // empty: minimum Renyi entropy on the clean signal
  std::size_t sigma_candidates = 24;

  double bound_hz = 10.0;             // B_f
  long slack_bins = 2;                // C
  std::optional<double> delta_hz;     // empty: 3 / (sqrt(2 pi) sigma)
  std::size_t delta_t = 20;
  std::size_t scale = 8;              // s
  std::size_t degree = 5;
  double tol_bins = 3.0;
  std::size_t init_stride = 1;
  std::size_t init_count = 16;
  MaximaSource maxima = MaximaSource::Magnitude;

  std::vector<double> snr_grid{-10, -8, -6, -4, -2, 0, 2, 4};
  std::size_t runs = 30;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "rrprd_out";

  bool has(const std::string& method) const;
  void validate() const;
};

// INI file with [signal], [method] and [bench] sections. Unknown keys are a ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

// Parses "renyi" or a positive number.
std::optional<double> parse_sigma(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);
std::vector<std::string> parse_name_list(const std::string& text);

// Modes of a named signal preset, valid for the given length.
std::vector<ModeSpec> preset_modes(const std::string& name);
std::vector<std::string> preset_names();

// Sigma with minimum Renyi entropy among candidates whose window fits N.
double choose_sigma(const Signal& clean, const ExperimentConfig& cfg);

// Everything computed from one noisy realization.
struct Analysis {
  double sigma = 0.0;
  TfGrid grid;
  ModulationGrid qhat;
  SlcGrid slc;
  std::vector<Ridge> srd;
  std::vector<Ridge> mbrd;
  std::vector<RidgePortion> rrps;
  std::vector<RidgeGroup> groups;
  FitResult fit;
  bool srd_ok = false;
  bool mbrd_ok = false;
  bool rrp_ok = false;
};

enum class FitFamily { Polynomial, Spline };

Analysis analyze(const Signal& noisy, std::size_t num_modes, double sigma, const ExperimentConfig& cfg,
                 FitFamily family = FitFamily::Polynomial);

// Estimated IF in Hz per mode, ordered by increasing mean frequency.
std::vector<std::vector<double>> ridge_inst_freq(const std::vector<Ridge>& ridges, std::size_t L, std::size_t N);
std::vector<std::vector<double>> model_inst_freq(const FitResult& fit, std::size_t L, std::size_t N);

// 20 log10(||ref|| / ||est - ref||) over [trim, L-1-trim].
double trimmed_snr(std::span<const double> ref, std::span<const double> est, std::size_t trim);
double trimmed_snr(const Signal& ref, const Signal& est, std::size_t trim);

struct BenchRecord {
  std::string method;
  std::size_t mode = 0;
  double input_snr = 0.0;
  double output_snr = 0.0;
  double output_snr_untrimmed = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  bool failed = false;
};

struct BenchSummary {
  std::string method;
  std::size_t mode = 0;
  double input_snr = 0.0;
  double mean_output_snr = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
};

struct BenchResult {
  double sigma = 0.0;
  std::vector<BenchRecord> records;
  std::vector<BenchSummary> summary;
};

// Deterministic seed for one (SNR point, realization) pair.
std::uint64_t realization_seed(std::uint64_t base, std::size_t snr_index, std::size_t run);

// Monte-Carlo benchmark; writes bench_records.csv and bench_summary.csv into
// cfg.out_dir when `write` is set. Worker count from RRPRD_WORKERS.
BenchResult run_bench(const ExperimentConfig& cfg, bool write = true);

std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records);

// Mean over modes of the summary rows for (method, snr).
double mean_over_modes(const std::vector<BenchSummary>& summary, const std::string& method, double snr);

// Single realization at the first SNR of the grid; writes the TF magnitude, RRPs,
// groups, fitted curves with bands, and ridges.
Analysis run_demo(const ExperimentConfig& cfg);

struct GwOptions {
  std::filesystem::path strain_path;
  std::optional<std::filesystem::path> nr_path;
  std::vector<double> tols{1.0, 2.0, 3.0};
  std::size_t bins = 512;
  std::optional<double> sigma;
  std::filesystem::path out_dir = "rrprd_gw";
  ExperimentConfig method;  // detector parameters
};

struct GwReport {
  double sigma = 0.0;
  std::size_t length = 0;
  std::vector<double> tols;
  std::vector<double> mr_snr;   // against NR, NaN without NR
  std::vector<double> lcr_snr;
  std::vector<FitResult> fits;
  std::string preprocessing;
};

// Mean removal and peak normalization of a real series.
std::vector<double> normalize_strain(std::vector<double> x);

// Analytic signal via the one-sided spectrum.
Signal analytic_signal(std::span<const double> x);

// Last column of a one- or two-column numeric file.
std::vector<double> read_series(const std::filesystem::path& path);

// Least-squares amplitude a minimizing ||ref - a est||.
double ls_amplitude(std::span<const double> ref, std::span<const double> est);

GwReport run_gw(const GwOptions& opt);

}  // namespace rrprd
