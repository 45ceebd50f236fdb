#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>
#include <stdexcept>

namespace rrprd::detail {

// In-place length-n complex DFT (forward: exp(-2 i pi jk / n)). FFTW planning is
// not thread-safe, so plan creation and destruction are serialized.
class Fft {
public:
  explicit Fft(std::size_t n, bool forward = true) : n_(n) {
    buf_ = fftw_alloc_complex(n);
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, forward ? FFTW_FORWARD : FFTW_BACKWARD,
                             FFTW_ESTIMATE);
    if (!plan_) {
      fftw_free(buf_);
      throw std::runtime_error("fft: failed to create plan");
    }
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::span<std::complex<double>> buffer() {
    return {reinterpret_cast<std::complex<double>*>(buf_), n_};
  }
  void execute() { fftw_execute(plan_); }
  std::size_t size() const { return n_; }

private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace rrprd::detail
