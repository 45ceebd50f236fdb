#pragma once

#include "rrprd/classic_rd.hpp"
#include "rrprd/retrieve.hpp"
#include "rrprd/ridge_fit.hpp"
#include "rrprd/rrp_extract.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rrprd::csv {

// Every file starts with "# schema: <name>/<version>" followed by a header row.

void write_magnitude(const std::filesystem::path& path, const Grid<cplx>& values);
void write_spectrum(const std::filesystem::path& path, const Grid<cplx>& values);  // n,k,real,imag
void write_ridges(const std::filesystem::path& path, const std::vector<Ridge>& ridges, std::size_t L,
                  std::size_t N);
void write_portions(const std::filesystem::path& path, const std::vector<RidgePortion>& rrps,
                    const SlcGrid& slc);
void write_groups(const std::filesystem::path& path, const std::vector<RidgeGroup>& groups,
                  const SlcGrid& slc);
void write_models(const std::filesystem::path& path, const FitResult& fit, std::size_t L, std::size_t N,
                  ChirpUnits units = ChirpUnits::Hz);
// Coefficient blocks (describe()) for each fitted model.
void write_model_coefficients(const std::filesystem::path& path, const FitResult& fit);
void write_modes(const std::filesystem::path& path, const std::vector<ModeEstimate>& modes);
void write_real_series(const std::filesystem::path& path, std::span<const double> values);

// Whitespace- or comma-separated numeric table; '#' comments and a non-numeric
// header row are skipped. Throws std::runtime_error on unreadable files.
std::vector<std::vector<double>> read_table(const std::filesystem::path& path);

}  // namespace rrprd::csv
