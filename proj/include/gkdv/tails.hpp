#pragma once

#include <array>
#include <span>
#include <vector>

#include "gkdv/discretization.hpp"
#include "gkdv/evolution.hpp"

namespace gkdv {

// Slowly decaying right tail c0 x^{-theta}, cut off smoothly on [x0/4, x0/2] and
// on [right_trunc, right_trunc + ramp].
struct TailSpec {
  double theta = 0.75;
  double beta = 0.5;
  double nu = 0.25;
  double c0 = 0.0;
  double x0 = 20.0;
  double t0 = 1600.0;
  double right_trunc = 1000.0;
  double ramp = 100.0;

  double left_start() const { return 0.25 * x0; }
  double power_start() const { return 0.5 * x0; }
  double right_end() const { return right_trunc + ramp; }
};

// Derived fields from theta and x0; c0 defaults to c0(theta), ramp to 10% of right_trunc.
TailSpec make_tail_spec(double theta, double x0, double right_trunc, double c0_scale = 1.0);

// f0 and its first derivatives at a point (k <= 3).
double tail_value(const TailSpec& spec, double x, int derivative = 0);

std::vector<double> build_tail(const TailSpec& spec, const SimGrid& grid);

// max over the nodes of |f0^(k)| x^{theta+k} / c0 for k = 0..3, on the exact-power region
// or on the whole support including both cutoffs
std::array<double, 4> tail_derivative_constants(const TailSpec& spec, const SimGrid& grid,
                                                bool whole_support = false);

// c0^2 (2 theta - 1)^{-1} (x0/2)^{1 - 2 theta}: L2 mass of the untruncated power region
double tail_power_mass(const TailSpec& spec);
// same with the right truncation at right_trunc
double tail_power_mass_truncated(const TailSpec& spec);

struct PersistenceSample {
  double t = 0.0;
  double sup0 = 0.0;  // sup |f - f0| x^{5 theta - 2}
  double sup1 = 0.0;  // sup |f_x - f0'| x^{5 theta - 1}
  double h1 = 0.0;    // ||f(t)||_{H^1}
};

struct PersistenceReport {
  double kappa0 = 0.0;
  double horizon = 0.0;
  double h1_initial = 0.0;
  std::vector<PersistenceSample> samples;
  bool bounded = true;   // end value <= 3x value at horizon/4, both orders
  bool h1_bounded = true;
};

struct PersistenceOptions {
  double kappa0 = 2.0;
  int n_samples = 16;
  double bounded_factor = 3.0;
  // sup is taken over kappa0 t^beta < x < x_cap_fraction * right_trunc, away from the truncation ramp
  double x_cap_fraction = 0.25;
};

// Evolves f from f0 at t0 over [t0, t0 + horizon] and samples the weighted differences.
PersistenceReport persistence_check(const TailSpec& spec, const SimGrid& grid, double horizon,
                                    const PersistenceOptions& opts = {}, const SolverConfig& cfg = {},
                                    const SpongeSpec& sponge = {});

// weighted suprema of one snapshot against f0
PersistenceSample persistence_sample(const TailSpec& spec, const SimGrid& grid, std::span<const double> f,
                                     std::span<const double> f0, double t, const PersistenceOptions& opts);

}  // namespace gkdv
