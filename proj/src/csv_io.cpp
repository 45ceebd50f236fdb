#include "rrprd/csv_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace rrprd::csv {

namespace {

std::ofstream open(const std::filesystem::path& path, const std::string& schema, const std::string& header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(12);
  os << "# schema: " << schema << "\n" << header << "\n";
  return os;
}

}  // namespace

void write_magnitude(const std::filesystem::path& path, const Grid<cplx>& values) {
  std::ostringstream header;
  header << "n";
  for (std::size_t k = 0; k < values.cols(); ++k) header << ",bin_" << k;
  auto os = open(path, "magnitude_matrix/1", header.str());
  for (std::size_t n = 0; n < values.rows(); ++n) {
    os << n;
    for (const auto& v : values.row(n)) os << "," << std::abs(v);
    os << "\n";
  }
}

void write_spectrum(const std::filesystem::path& path, const Grid<cplx>& values) {
  auto os = open(path, "stft/1", "n,k,real,imag");
  for (std::size_t n = 0; n < values.rows(); ++n) {
    for (std::size_t k = 0; k < values.cols(); ++k) {
      os << n << "," << k << "," << values(n, k).real() << "," << values(n, k).imag() << "\n";
    }
  }
}

void write_ridges(const std::filesystem::path& path, const std::vector<Ridge>& ridges, std::size_t L,
                  std::size_t N) {
  auto os = open(path, "ridges/1", "mode,n,bin,frequency_hz");
  const double to_hz = static_cast<double>(L) / static_cast<double>(N);
  for (std::size_t p = 0; p < ridges.size(); ++p) {
    for (std::size_t n = 0; n < ridges[p].bins.size(); ++n) {
      os << p << "," << n << "," << ridges[p].bins[n] << "," << static_cast<double>(ridges[p].bins[n]) * to_hz
         << "\n";
    }
  }
}

void write_portions(const std::filesystem::path& path, const std::vector<RidgePortion>& rrps,
                    const SlcGrid& slc) {
  auto os = open(path, "rrps/1", "portion_id,n,k,s_lc");
  for (std::size_t i = 0; i < rrps.size(); ++i) {
    for (std::size_t j = 0; j < rrps[i].bins.size(); ++j) {
      const std::size_t n = rrps[i].start + j;
      const long k = rrps[i].bins[j];
      os << i << "," << n << "," << k << "," << slc.s_lc(n, static_cast<std::size_t>(k)) << "\n";
    }
  }
}

void write_groups(const std::filesystem::path& path, const std::vector<RidgeGroup>& groups,
                  const SlcGrid& slc) {
  auto os = open(path, "groups/1", "group_id,n,k,s_lc,group_energy");
  for (std::size_t q = 0; q < groups.size(); ++q) {
    for (const auto& [n, k] : groups[q].points) {
      os << q << "," << n << "," << k << "," << slc.s_lc(n, static_cast<std::size_t>(k)) << ","
         << groups[q].energy << "\n";
    }
  }
}

void write_models(const std::filesystem::path& path, const FitResult& fit, std::size_t L, std::size_t N,
                  ChirpUnits units) {
  auto os = open(path, "models/1", "mode,n,curve_bins,curve_hz,chirp_rate_hz,band_lo,band_hi");
  const double to_hz = static_cast<double>(L) / static_cast<double>(N);
  for (std::size_t p = 0; p < fit.models.size(); ++p) {
    const auto& c = fit.models[p].curve;
    for (std::size_t n = 0; n < L; ++n) {
      const double t = static_cast<double>(n) / static_cast<double>(L);
      const double v = c.value(t);
      os << p << "," << n << "," << v << "," << v * to_hz << "," << curve_chirp_rate(c, t, L, N, units);
      if (p < fit.bands.modes()) {
        os << "," << fit.bands.bands[p][n].lo << "," << fit.bands.bands[p][n].hi;
      } else {
        os << ",,";
      }
      os << "\n";
    }
  }
}

void write_model_coefficients(const std::filesystem::path& path, const FitResult& fit) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# schema: model_coefficients/1\n";
  for (std::size_t p = 0; p < fit.models.size(); ++p) {
    os << "# mode " << p << "\n" << fit.models[p].curve.describe();
  }
}

void write_modes(const std::filesystem::path& path, const std::vector<ModeEstimate>& modes) {
  auto os = open(path, "modes/1", "mode,n,real,imag");
  for (std::size_t p = 0; p < modes.size(); ++p) {
    for (std::size_t n = 0; n < modes[p].length(); ++n) {
      os << p << "," << n << "," << modes[p][n].real() << "," << modes[p][n].imag() << "\n";
    }
  }
}

void write_real_series(const std::filesystem::path& path, std::span<const double> values) {
  auto os = open(path, "strain/1", "value");
  for (double v : values) os << v << "\n";
}

std::vector<std::vector<double>> read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    bool numeric = true;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) numeric = false;
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (row.empty()) continue;
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw std::runtime_error("non-numeric row in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rrprd::csv
