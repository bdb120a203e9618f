#include "gkdv/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>

namespace gkdv {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n, FftRigor rigor) : n_(n) {
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  spec_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  if (!real_ || !spec_) {
    release();
    throw std::bad_alloc();
  }
  const unsigned flags = (rigor == FftRigor::Measure ? FFTW_MEASURE : FFTW_ESTIMATE) | FFTW_DESTROY_INPUT;
  std::lock_guard lock(planner_mutex());
  const int ni = static_cast<int>(n);
  plan_fwd_ = fftw_plan_dft_r2c_1d(ni, real_, reinterpret_cast<fftw_complex*>(spec_), flags);
  plan_inv_ = fftw_plan_dft_c2r_1d(ni, reinterpret_cast<fftw_complex*>(spec_), real_, flags);
  std::fill_n(real_, n, 0.0);
  std::fill_n(spec_, n / 2 + 1, std::complex<double>{});
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& o) noexcept
    : n_(o.n_), real_(std::exchange(o.real_, nullptr)), spec_(std::exchange(o.spec_, nullptr)),
      plan_fwd_(std::exchange(o.plan_fwd_, nullptr)), plan_inv_(std::exchange(o.plan_inv_, nullptr)) {}

RealFft& RealFft::operator=(RealFft&& o) noexcept {
  if (this != &o) {
    release();
    n_ = o.n_;
    real_ = std::exchange(o.real_, nullptr);
    spec_ = std::exchange(o.spec_, nullptr);
    plan_fwd_ = std::exchange(o.plan_fwd_, nullptr);
    plan_inv_ = std::exchange(o.plan_inv_, nullptr);
  }
  return *this;
}

void RealFft::release() {
  std::lock_guard lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  if (real_) fftw_free(real_);
  if (spec_) fftw_free(spec_);
  plan_fwd_ = plan_inv_ = nullptr;
  real_ = nullptr;
  spec_ = nullptr;
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }

void RealFft::inverse() {
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double s = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) real_[i] *= s;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  forward();
  std::copy_n(spec_, spectrum_size(), out.begin());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  std::copy(in.begin(), in.end(), spec_);
  inverse();
  std::copy_n(real_, n_, out.begin());
}

RealFft& cached_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace gkdv
