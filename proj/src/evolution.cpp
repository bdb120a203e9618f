#include "gkdv/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"

namespace gkdv {

namespace {
using cplx = std::complex<double>;

// RK4 stability limit on the imaginary axis
constexpr double kRk4ImagBound = 2.8;

double weight_of_mode(std::size_t m, std::size_t n) { return (m == 0 || m == n / 2) ? 1.0 : 2.0; }
}  // namespace

std::vector<double> SpongeSpec::coefficient(const SimGrid& grid) const {
  std::vector<double> c(grid.size(), 0.0);
  if (!active()) return c;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    double s = 0.0;
    if (left) s = std::max(s, 1.0 - smooth_step((x - grid.x_min()) / width));
    if (right) s = std::max(s, 1.0 - smooth_step((grid.x_max() - x) / width));
    c[j] = strength * s;
  }
  return c;
}

Conserved conserved_quantities(const PeriodicGrid& grid, std::span<const double> field) {
  const auto d = spectral_derivative(grid, field, 1);
  double m = 0.0, kin = 0.0, pot = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double u2 = field[j] * field[j];
    m += u2;
    kin += d[j] * d[j];
    pot += u2 * u2 * u2;
  }
  const double h = grid.spacing();
  return {m * h, (0.5 * kin - pot / 6.0) * h};
}

std::vector<double> evolve_airy(const PeriodicGrid& grid, std::span<const double> field, double duration) {
  const std::size_t n = grid.size();
  auto& fft = cached_fft(n);
  std::copy(field.begin(), field.end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const double k = grid.wavenumber(m);
    const double ph = k * k * k * duration;
    // the Nyquist mode has no odd-derivative content and stays put
    if (m != n / 2) spec[m] *= std::polar(1.0, ph);
  }
  fft.inverse();
  return {fft.real().begin(), fft.real().end()};
}

GkdvSolver::GkdvSolver(const SimGrid& grid, const SolverConfig& cfg, const SpongeSpec& sponge,
                       std::span<const double> u0, double t0)
    : grid_(grid), cfg_(cfg), fft_(grid.size(), cfg.rigor), t_(t0), dt_cap_(cfg.dt_max) {
  const std::size_t n = grid.size();
  const std::size_t nm = n / 2 + 1;
  require(u0.size() == n, ErrorCode::OutOfRange, "initial field does not match the grid");
  require(cfg.dt_max > 0.0, ErrorCode::ConfigError, "dt_max must be positive");
  damping_ = sponge.coefficient(grid);
  sponge_on_ = sponge.active();
  k_.resize(nm);
  ik_mask_.resize(nm);
  k3_.resize(nm);
  const std::size_t cut = cfg.dealias ? n / 3 : n / 2 - 1;
  for (std::size_t m = 0; m < nm; ++m) {
    k_[m] = grid.wavenumber(m);
    k3_[m] = k_[m] * k_[m] * k_[m];
    ik_mask_[m] = (m <= cut) ? k_[m] : 0.0;
  }
  for (auto* buf : {&v_, &nv_, &na_, &nb_, &nc_, &a_, &b_, &c_, &vn_}) buf->assign(nm, cplx{});
  u_.assign(u0.begin(), u0.end());
  un_.resize(n);
  for (double x : u_)
    if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "initial field is not finite");
  fft_.forward(u_, v_);
  measure(v_, u_, last_);
  last_.t = t_;
  grad0_ = last_.grad_l2;
}

const GkdvSolver::Coefficients& GkdvSolver::coefficients(double h) {
  auto it = coef_cache_.find(h);
  if (it != coef_cache_.end()) return it->second;
  if (coef_cache_.size() > 16) coef_cache_.clear();
  Coefficients c;
  const std::size_t nm = k_.size();
  for (auto* v : {&c.e, &c.e2, &c.q, &c.f1, &c.f2, &c.f3}) v->resize(nm);
  constexpr int contour = 32;
  for (std::size_t m = 0; m < nm; ++m) {
    // L = i k^3, the Nyquist mode carries no odd-derivative content
    const cplx z = (m == nm - 1) ? cplx(0.0) : cplx(0.0, k3_[m] * h);
    c.e[m] = std::exp(z);
    c.e2[m] = std::exp(0.5 * z);
    auto phi = [](cplx w, cplx& q, cplx& f1, cplx& f2, cplx& f3) {
      const cplx ew = std::exp(w), ew2 = std::exp(0.5 * w), w3 = w * w * w;
      q = (ew2 - 1.0) / w;
      f1 = (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
      f2 = (2.0 + w + ew * (-2.0 + w)) / w3;
      f3 = (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
    };
    cplx q, f1, f2, f3;
    if (std::abs(z) > 1.0) {
      phi(z, q, f1, f2, f3);
    } else {
      // contour average avoids cancellation near z = 0
      q = f1 = f2 = f3 = 0.0;
      for (int j = 0; j < contour; ++j) {
        const cplx r = std::polar(1.0, 2.0 * 3.141592653589793 * (j + 0.5) / contour);
        cplx a, b, cc, d;
        phi(z + r, a, b, cc, d);
        q += a, f1 += b, f2 += cc, f3 += d;
      }
      q /= contour, f1 /= contour, f2 /= contour, f3 /= contour;
    }
    c.q[m] = h * q;
    c.f1[m] = h * f1;
    c.f2[m] = h * f2;
    c.f3[m] = h * f3;
  }
  return coef_cache_.emplace(h, std::move(c)).first->second;
}

// out = -ik FFT(u^5) for the field currently held in the real buffer
void GkdvSolver::nonlinear_from_real(std::span<cplx> out) {
  auto r = fft_.real();
  for (double& x : r) {
    const double x2 = x * x;
    x = x2 * x2 * x;
  }
  fft_.forward();
  auto s = fft_.spectrum();
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = cplx(0.0, -ik_mask_[m]) * s[m];
}

void GkdvSolver::nonlinear(std::span<const cplx> v, std::span<cplx> out) {
  std::copy(v.begin(), v.end(), fft_.spectrum().begin());
  fft_.inverse();
  nonlinear_from_real(out);
}

void GkdvSolver::measure(std::span<const cplx> v, std::span<const double> u, StepDiagnostics& d) const {
  const std::size_t n = grid_.size();
  double kin = 0.0;
  for (std::size_t m = 1; m < v.size(); ++m) kin += weight_of_mode(m, n) * k_[m] * k_[m] * std::norm(v[m]);
  kin /= static_cast<double>(n);
  double mass = 0.0, pot = 0.0, mx = 0.0;
  for (double x : u) {
    const double x2 = x * x;
    mass += x2;
    pot += x2 * x2 * x2;
    mx = std::max(mx, std::fabs(x));
  }
  const double h = grid_.spacing();
  d.mass = mass * h;
  d.energy = (0.5 * kin - pot / 6.0) * h;
  d.grad_l2 = std::sqrt(kin * h);
  d.max_abs = mx;
}

double GkdvSolver::proposed_dt() const {
  if (!cfg_.adaptive) return dt_cap_;
  const double kmax = cfg_.dealias ? grid_.wavenumber(grid_.size() / 3) : grid_.nyquist();
  const double a = last_.max_abs;
  const double rate = 5.0 * a * a * a * a * kmax;
  double dt = dt_cap_;
  if (rate > 0.0) {
    const double limit = cfg_.cfl * kRk4ImagBound / rate;
    // power-of-two fractions of the cap keep the phase cache small
    while (dt > limit && dt > 1e-12) dt *= 0.5;
  }
  return dt;
}

void GkdvSolver::step(double max_dt) {
  const std::size_t nm = k_.size();
  const double e0 = last_.energy;
  const double scale0 = 0.5 * last_.grad_l2 * last_.grad_l2 + std::fabs(e0) + 1e-300;
  int rejections = 0;
  for (;;) {
    const double h = std::min(proposed_dt(), max_dt);
    const Coefficients& C = coefficients(h);

    std::copy(u_.begin(), u_.end(), fft_.real().begin());
    nonlinear_from_real(nv_);
    for (std::size_t m = 0; m < nm; ++m) a_[m] = C.e2[m] * v_[m] + C.q[m] * nv_[m];
    nonlinear(a_, na_);
    for (std::size_t m = 0; m < nm; ++m) b_[m] = C.e2[m] * v_[m] + C.q[m] * na_[m];
    nonlinear(b_, nb_);
    for (std::size_t m = 0; m < nm; ++m) c_[m] = C.e2[m] * a_[m] + C.q[m] * (2.0 * nb_[m] - nv_[m]);
    nonlinear(c_, nc_);
    for (std::size_t m = 0; m < nm; ++m)
      vn_[m] = C.e[m] * v_[m] + C.f1[m] * nv_[m] + 2.0 * C.f2[m] * (na_[m] + nb_[m]) + C.f3[m] * nc_[m];

    std::copy(vn_.begin(), vn_.end(), fft_.spectrum().begin());
    fft_.inverse();
    std::copy(fft_.real().begin(), fft_.real().end(), un_.begin());

    bool finite = true;
    for (double x : un_) finite = finite && std::isfinite(x);
    StepDiagnostics d;
    if (finite) measure(vn_, un_, d);
    const bool jump = !finite || std::fabs(d.energy - e0) > cfg_.energy_jump_tol * scale0;
    if (jump && cfg_.adaptive && rejections < cfg_.max_rejections) {
      ++rejections;
      dt_cap_ = 0.5 * h;
      continue;
    }
    if (!finite) fail(ErrorCode::NonFinite, "solution became non-finite at t = " + std::to_string(t_));

    if (sponge_on_) {
      const double m_pre = d.mass, e_pre = d.energy;
      for (std::size_t j = 0; j < un_.size(); ++j) un_[j] *= std::exp(-h * damping_[j]);
      fft_.forward(un_, vn_);
      measure(vn_, un_, d);
      absorbed_mass_ += m_pre - d.mass;
      absorbed_energy_ += e_pre - d.energy;
    }
    std::swap(u_, un_);
    std::swap(v_, vn_);
    t_ += h;
    ++steps_;
    d.t = t_;
    d.dt = h;
    last_ = d;
    if (on_step) on_step(last_);
    if (last_.max_abs > cfg_.blowup_threshold)
      fail(ErrorCode::BlowupDetected, "sup norm " + std::to_string(last_.max_abs) + " exceeds threshold at t = " +
                                          std::to_string(t_));
    if (grad0_ > 0.0 && last_.grad_l2 > cfg_.grad_growth_limit * grad0_)
      fail(ErrorCode::BlowupDetected, "gradient norm grew beyond limit at t = " + std::to_string(t_));
    return;
  }
}

void GkdvSolver::advance_to(double t_target) {
  while (t_ < t_target) {
    const double remaining = t_target - t_;
    // avoid a sliver step by splitting the last two evenly
    const double h = proposed_dt();
    double take = remaining;
    if (remaining > h) take = (remaining < 2.0 * h) ? 0.5 * remaining : h;
    if (remaining <= 1e-12 * std::max(1.0, std::fabs(t_target))) {
      t_ = t_target;
      break;
    }
    step(take);
    if (std::fabs(t_target - t_) <= 1e-12 * std::max(1.0, std::fabs(t_target))) t_ = t_target;
  }
}

SolverState step_gkdv(const SolverState& state, const SimGrid& grid, const SpongeSpec& sponge,
                      const SolverConfig& cfg) {
  SolverConfig c = cfg;
  if (state.dt > 0.0) c.dt_max = state.dt;
  GkdvSolver s(grid, c, sponge, state.u, state.t);
  s.step(c.dt_max);
  SolverState out = s.state();
  out.step_count = state.step_count + 1;
  return out;
}

}  // namespace gkdv
