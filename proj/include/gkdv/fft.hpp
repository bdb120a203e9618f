#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace gkdv {

enum class FftRigor { Estimate, Measure };

// Real-to-complex transform pair of fixed size with its own aligned buffers.
// forward() is unnormalized; inverse() divides by n.
class RealFft {
 public:
  explicit RealFft(std::size_t n, FftRigor rigor = FftRigor::Estimate);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  std::span<double> real() { return {real_, n_}; }
  std::span<std::complex<double>> spectrum() { return {spec_, n_ / 2 + 1}; }

  // In-buffer transforms. inverse() overwrites the spectrum buffer.
  void forward();
  void inverse();

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  void release();

  std::size_t n_ = 0;
  double* real_ = nullptr;
  std::complex<double>* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

// Per-thread cache of estimate-rigor transforms keyed by size.
RealFft& cached_fft(std::size_t n);

}  // namespace gkdv
