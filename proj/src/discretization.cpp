#include "gkdv/discretization.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/fft.hpp"

namespace gkdv {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

PeriodicGrid::PeriodicGrid(double x_min, double length, std::size_t n_points)
    : x_min_(x_min), length_(length), n_(n_points) {
  require(is_power_of_two(n_points) && n_points >= 8, ErrorCode::GridTooSmall,
          "grid size must be a power of two >= 8, got " + std::to_string(n_points));
  require(length > 0.0 && std::isfinite(length), ErrorCode::GridTooSmall, "grid length must be positive");
}

std::vector<double> PeriodicGrid::nodes() const {
  return sample([](double x) { return x; });
}

double PeriodicGrid::wavenumber(std::size_t m) const {
  return 2.0 * std::numbers::pi * static_cast<double>(m) / length_;
}

std::vector<double> PeriodicGrid::wavenumbers() const {
  std::vector<double> k(n_ / 2 + 1);
  for (std::size_t m = 0; m < k.size(); ++m) k[m] = wavenumber(m);
  return k;
}

ProfileGrid::ProfileGrid(double half_width, std::size_t n_points)
    : PeriodicGrid(-half_width, 2.0 * half_width, n_points) {
  require(half_width >= 20.0, ErrorCode::GridTooSmall, "profile grid half_width must be >= 20");
}

SimGrid::SimGrid(double x_min, double x_max, std::size_t n_points) : PeriodicGrid(x_min, x_max - x_min, n_points) {}

std::vector<double> spectral_derivative(const PeriodicGrid& grid, std::span<const double> field, int order,
                                        bool dealias) {
  require(order >= 0 && order <= 3, ErrorCode::OutOfRange, "derivative order must be in 0..3");
  const std::size_t n = grid.size();
  require(field.size() == n, ErrorCode::OutOfRange, "field size does not match grid");
  auto& fft = cached_fft(n);
  std::copy(field.begin(), field.end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  const std::size_t nyq = n / 2;
  const std::size_t cut = n / 3;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    if (dealias && m > cut) {
      spec[m] = 0.0;
      continue;
    }
    const double k = grid.wavenumber(m);
    std::complex<double> factor = 1.0;
    for (int p = 0; p < order; ++p) factor *= std::complex<double>(0.0, k);
    if (m == nyq && order % 2 == 1) factor = 0.0;
    spec[m] *= factor;
  }
  fft.inverse();
  return {fft.real().begin(), fft.real().end()};
}

std::vector<double> spectral_antiderivative(const PeriodicGrid& grid, std::span<const double> field) {
  const std::size_t n = grid.size();
  auto& fft = cached_fft(n);
  std::copy(field.begin(), field.end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  const double mean = spec[0].real() / static_cast<double>(n);
  spec[0] = 0.0;
  spec[n / 2] = 0.0;
  for (std::size_t m = 1; m < n / 2; ++m) spec[m] /= std::complex<double>(0.0, grid.wavenumber(m));
  fft.inverse();
  std::vector<double> out(fft.real().begin(), fft.real().end());
  const double base = out[0];
  for (std::size_t j = 0; j < n; ++j) out[j] += mean * (grid.node(j) - grid.x_min()) - base;
  return out;
}

double integrate(const PeriodicGrid& grid, std::span<const double> field) {
  double s = 0.0;
  for (double v : field) s += v;
  return s * grid.spacing();
}

double inner(const PeriodicGrid& grid, std::span<const double> f, std::span<const double> g) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
  return s * grid.spacing();
}

double l2_norm(const PeriodicGrid& grid, std::span<const double> f) { return std::sqrt(inner(grid, f, f)); }

double l2_norm_spectral(const PeriodicGrid& grid, std::span<const double> f) {
  const std::size_t n = grid.size();
  auto& fft = cached_fft(n);
  std::copy(f.begin(), f.end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  double s = std::norm(spec[0]) + std::norm(spec[n / 2]);
  for (std::size_t m = 1; m < n / 2; ++m) s += 2.0 * std::norm(spec[m]);
  return std::sqrt(s * grid.spacing() / static_cast<double>(n));
}

double sup_norm(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::fabs(v));
  return m;
}

TrigInterpolant::TrigInterpolant(const PeriodicGrid& grid, std::span<const double> field)
    : x_min_(grid.x_min()), length_(grid.length()), n_(grid.size()) {
  auto& fft = cached_fft(n_);
  std::copy(field.begin(), field.end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  coef_.assign(spec.begin(), spec.end());
  const double s = 1.0 / static_cast<double>(n_);
  for (auto& c : coef_) c *= s;
}

std::complex<double> TrigInterpolant::series(double x, bool differentiate) const {
  const double theta = 2.0 * std::numbers::pi * (x - x_min_) / length_;
  const std::size_t nyq = n_ / 2;
  const double k1 = 2.0 * std::numbers::pi / length_;
  std::complex<double> acc = differentiate ? 0.0 : coef_[0];
  const std::complex<double> step = std::polar(1.0, theta);
  std::complex<double> z = 1.0;
  for (std::size_t m = 1; m < nyq; ++m) {
    // re-seed the phase periodically to keep rounding drift small
    z = (m % 64 == 0) ? std::polar(1.0, theta * static_cast<double>(m)) : z * step;
    const std::complex<double> term = coef_[m] * z;
    acc += differentiate ? std::complex<double>(0.0, k1 * static_cast<double>(m)) * term * 2.0 : 2.0 * term;
  }
  const double tn = theta * static_cast<double>(nyq);
  if (differentiate)
    acc += -coef_[nyq].real() * k1 * static_cast<double>(nyq) * std::sin(tn);
  else
    acc += coef_[nyq].real() * std::cos(tn);
  return acc;
}

double TrigInterpolant::operator()(double x) const { return series(x, false).real(); }
double TrigInterpolant::derivative(double x) const { return series(x, true).real(); }

std::vector<double> TrigInterpolant::operator()(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
  return out;
}

// -------- weights --------

WeightFamily parse_weight_family(const std::string& name) {
  if (name == "omega_r") return WeightFamily::OmegaR;
  if (name == "psi_B") return WeightFamily::PsiB;
  if (name == "phi_B") return WeightFamily::PhiB;
  if (name == "loc") return WeightFamily::Loc;
  fail(ErrorCode::ConfigError, "unknown weight family '" + name + "'");
}

std::string to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::OmegaR: return "omega_r";
    case WeightFamily::PsiB: return "psi_B";
    case WeightFamily::PhiB: return "phi_B";
    case WeightFamily::Loc: return "loc";
  }
  return "?";
}

namespace {
using Gauss = boost::math::quadrature::gauss<double, 10>;

template <class T>
T unit_bump(const T& u) {
  const double v = detail::value(u);
  if (v <= 0.0 || v >= 1.0) return T(0.0);
  return flat_bump(u) * flat_bump(1.0 - u);
}
}  // namespace

OmegaWeight::OmegaWeight(double r) : r_(r) {
  require(r > 0.0 && std::isfinite(r), ErrorCode::OutOfRange, "omega_r needs r > 0");
  delta_ = std::min(0.5, r);
  bump_amp_ = 0.0;
  bump_norm_ = 1.0;
  const std::size_t cells = std::max<std::size_t>(4000, static_cast<std::size_t>(40.0 / delta_));
  table_h_ = 2.0 / static_cast<double>(cells);

  // integrals of the two matching terms and of the raw bump, cell by cell
  std::vector<double> base_cell(cells), bump_cell(cells);
  const double d = delta_;
  auto base = [this, d](double x) {
    return 0.125 * (1.0 - smooth_step(x / d)) + (r_ / x) * smooth_step((x - 2.0 + d) / d);
  };
  auto bump = [d](double x) { return unit_bump((x - 0.5 * d) / (2.0 - d)); };
  double base_total = 0.0, bump_total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = static_cast<double>(i) * table_h_, b = a + table_h_;
    base_cell[i] = Gauss::integrate(base, a, b);
    bump_cell[i] = Gauss::integrate(bump, a, b);
    base_total += base_cell[i];
    bump_total += bump_cell[i];
  }
  bump_norm_ = bump_total;
  bump_amp_ = r_ * std::log(2.0) - base_total;
  require(bump_amp_ > 0.0, ErrorCode::OutOfRange, "omega_r construction lost monotonicity");

  table_l_.resize(cells + 1);
  table_dl_.resize(cells + 1);
  table_l_[0] = 0.0;
  for (std::size_t i = 0; i < cells; ++i)
    table_l_[i + 1] = table_l_[i] + base_cell[i] + bump_amp_ * bump_cell[i] / bump_norm_;
  for (std::size_t i = 0; i <= cells; ++i) {
    double l1, l2, l3;
    log_slope(static_cast<double>(i) * table_h_, l1, l2, l3);
    table_dl_[i] = l1;
  }
  table_l_[cells] = r_ * std::log(2.0);
}

void OmegaWeight::log_slope(double x, double& l1, double& l2, double& l3) const {
  if (x <= 0.0) {
    l1 = 0.125;
    l2 = l3 = 0.0;
    return;
  }
  if (x >= 2.0) {
    l1 = r_ / x;
    l2 = -r_ / (x * x);
    l3 = 2.0 * r_ / (x * x * x);
    return;
  }
  using J = Jet<2>;
  const J xj = J::variable(x);
  const double d = delta_;
  const J v = 0.125 * (1.0 - smooth_step(xj / d)) + r_ / xj * smooth_step((xj - 2.0 + d) / d) +
              (bump_amp_ / bump_norm_) * unit_bump((xj - 0.5 * d) / (2.0 - d));
  l1 = v.derivative(0);
  l2 = v.derivative(1);
  l3 = v.derivative(2);
}

double OmegaWeight::log_weight(double x) const {
  if (x <= 0.0) return x / 8.0;
  if (x >= 2.0) return r_ * std::log(x);
  const double pos = x / table_h_;
  std::size_t i = std::min(static_cast<std::size_t>(pos), table_l_.size() - 2);
  const double t = pos - static_cast<double>(i);
  const double h = table_h_;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * table_l_[i] + (t3 - 2 * t2 + t) * h * table_dl_[i] +
         (-2 * t3 + 3 * t2) * table_l_[i + 1] + (t3 - t2) * h * table_dl_[i + 1];
}

double OmegaWeight::operator()(double x) const { return std::exp(log_weight(x)); }

OmegaWeight::Derivs OmegaWeight::derivs(double x) const {
  double l1, l2, l3;
  log_slope(x, l1, l2, l3);
  const double w = (*this)(x);
  return {w, l1 * w, (l2 + l1 * l1) * w, (l3 + 3.0 * l1 * l2 + l1 * l1 * l1) * w};
}

double psi_b(double y, double B) { return psi_shape(y / B); }
double phi_b(double y, double B) { return std::exp(y / B); }

Weight::Weight(WeightSpec spec) : spec_(spec) {
  require(spec.scale > 0.0, ErrorCode::OutOfRange, "weight scale must be positive");
  if (spec.family == WeightFamily::OmegaR) omega_.emplace_back(spec.parameter);
}

double Weight::operator()(double x) const {
  const double y = (x - spec_.shift) / spec_.scale;
  switch (spec_.family) {
    case WeightFamily::OmegaR: return omega_.front()(y);
    case WeightFamily::PsiB: return psi_b(y, spec_.parameter);
    case WeightFamily::PhiB: return phi_b(y, spec_.parameter);
    case WeightFamily::Loc: return std::exp(-std::fabs(y) / spec_.parameter);
  }
  return 0.0;
}

double weighted_norm(const PeriodicGrid& grid, std::span<const double> field, const WeightSpec& spec) {
  const Weight w(spec);
  double s = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    if (field[j] == 0.0) continue;
    const double wj = w(grid.node(j));
    if (!(wj <= 1e300)) fail(ErrorCode::Overflow, "weight exceeds 1e300 on the field support");
    s += field[j] * field[j] * wj;
  }
  return std::sqrt(s * grid.spacing());
}

}  // namespace gkdv
