#include "gkdv/tails.hpp"

#include <algorithm>
#include <cmath>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/jet.hpp"
#include "gkdv/reduced_ode.hpp"

namespace gkdv {

TailSpec make_tail_spec(double theta, double x0, double right_trunc, double c0_scale) {
  const auto ex = exponent_relations(theta);
  require(x0 > 0.0, ErrorCode::OutOfRange, "x0 must be positive");
  require(right_trunc > 0.5 * x0, ErrorCode::OutOfRange, "right_trunc must exceed x0/2");
  TailSpec s;
  s.theta = theta;
  s.beta = ex.beta;
  s.nu = ex.nu;
  s.c0 = c0_scale * c0_of_theta(theta);
  s.x0 = x0;
  s.t0 = std::pow(2.0 * x0, 1.0 / ex.beta);
  s.right_trunc = right_trunc;
  s.ramp = 0.1 * right_trunc;
  return s;
}

namespace {

template <class T>
T tail_expr(const TailSpec& s, const T& x) {
  const double xv = detail::value(x);
  if (xv <= s.left_start() || xv >= s.right_end() || s.c0 == 0.0) return T(0.0);
  T v = s.c0 * pow(x, -s.theta);
  if (xv < s.power_start()) v = v * smooth_step((x - s.left_start()) / (s.power_start() - s.left_start()));
  if (xv > s.right_trunc) v = v * (1.0 - smooth_step((x - s.right_trunc) / s.ramp));
  return v;
}

}  // namespace

double tail_value(const TailSpec& spec, double x, int derivative) {
  require(derivative >= 0 && derivative <= 3, ErrorCode::OutOfRange, "tail derivative order must be 0..3");
  if (derivative == 0) {
    if (x <= spec.left_start() || x >= spec.right_end() || spec.c0 == 0.0) return 0.0;
    // exact power in the flat region so f0(x0) = c0 x0^{-theta} bit-for-bit
    if (x >= spec.power_start() && x <= spec.right_trunc) return spec.c0 * std::pow(x, -spec.theta);
  }
  return tail_expr(spec, Jet<3>::variable(x)).derivative(static_cast<std::size_t>(derivative));
}

std::vector<double> build_tail(const TailSpec& spec, const SimGrid& grid) {
  if (spec.c0 != 0.0)
    require(grid.x_min() < spec.left_start() && grid.x_max() > spec.right_end(), ErrorCode::GridTooSmall,
            "grid must cover [x0/4, right_trunc + ramp]");
  return grid.sample([&](double x) { return tail_value(spec, x); });
}

std::array<double, 4> tail_derivative_constants(const TailSpec& spec, const SimGrid& grid, bool whole_support) {
  std::array<double, 4> c{};
  if (spec.c0 == 0.0) return c;
  const double lo = whole_support ? spec.left_start() : spec.power_start();
  const double hi = whole_support ? spec.right_end() : spec.right_trunc;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (x < lo || x > hi) continue;
    const auto jet = tail_expr(spec, Jet<3>::variable(x));
    for (int k = 0; k <= 3; ++k)
      c[k] = std::max(c[k], std::fabs(jet.derivative(k)) * std::pow(x, spec.theta + k) / spec.c0);
  }
  return c;
}

double tail_power_mass(const TailSpec& spec) {
  const double a = 2.0 * spec.theta - 1.0;
  return spec.c0 * spec.c0 / a * std::pow(spec.power_start(), -a);
}

double tail_power_mass_truncated(const TailSpec& spec) {
  const double a = 2.0 * spec.theta - 1.0;
  return spec.c0 * spec.c0 / a * (std::pow(spec.power_start(), -a) - std::pow(spec.right_trunc, -a));
}

PersistenceSample persistence_sample(const TailSpec& spec, const SimGrid& grid, std::span<const double> f,
                                     std::span<const double> f0, double t, const PersistenceOptions& opts) {
  PersistenceSample s;
  s.t = t;
  const auto fx = spectral_derivative(grid, f, 1);
  // same discrete derivative on both sides so the comparison vanishes at t0
  const auto f0x = spectral_derivative(grid, f0, 1);
  s.h1 = std::sqrt(std::pow(l2_norm(grid, f), 2) + std::pow(l2_norm(grid, fx), 2));
  const double x_lo = std::max(opts.kappa0 * std::pow(t, spec.beta), 1e-300);
  const double x_hi = opts.x_cap_fraction * spec.right_trunc;
  const double p0 = 5.0 * spec.theta - 2.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (x <= x_lo || x >= x_hi) continue;
    s.sup0 = std::max(s.sup0, std::fabs(f[j] - f0[j]) * std::pow(x, p0));
    s.sup1 = std::max(s.sup1, std::fabs(fx[j] - f0x[j]) * std::pow(x, p0 + 1.0));
  }
  return s;
}

PersistenceReport persistence_check(const TailSpec& spec, const SimGrid& grid, double horizon,
                                    const PersistenceOptions& opts, const SolverConfig& cfg,
                                    const SpongeSpec& sponge) {
  require(horizon >= 0.0, ErrorCode::OutOfRange, "horizon must be non-negative");
  require(opts.n_samples >= 2, ErrorCode::OutOfRange, "need at least two persistence samples");
  PersistenceReport rep;
  rep.kappa0 = opts.kappa0;
  rep.horizon = horizon;
  const auto f0 = build_tail(spec, grid);

  std::vector<double> times;
  const double ratio = (spec.t0 + horizon) / spec.t0;
  for (int i = 0; i < opts.n_samples; ++i) times.push_back(spec.t0 * std::pow(ratio, double(i) / (opts.n_samples - 1)));
  const double t_quarter = spec.t0 + 0.25 * horizon;
  times.push_back(t_quarter);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  times.back() = spec.t0 + horizon;

  GkdvSolver solver(grid, cfg, sponge, f0, spec.t0);
  PersistenceSample quarter;
  for (double t : times) {
    solver.advance_to(t);
    rep.samples.push_back(persistence_sample(spec, grid, solver.field(), f0, t, opts));
    if (t == t_quarter) quarter = rep.samples.back();
  }
  rep.h1_initial = rep.samples.front().h1;
  const auto& last = rep.samples.back();
  rep.bounded = last.sup0 <= opts.bounded_factor * quarter.sup0 && last.sup1 <= opts.bounded_factor * quarter.sup1;
  for (const auto& s : rep.samples) rep.h1_bounded = rep.h1_bounded && s.h1 <= 2.0 * rep.h1_initial;
  return rep;
}

}  // namespace gkdv
