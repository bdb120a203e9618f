#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gkdv/discretization.hpp"
#include "gkdv/fft.hpp"

namespace gkdv {

struct SpongeSpec {
  double width = 0.0;     // length of each damping layer
  double strength = 0.0;  // peak damping rate
  bool left = false;
  bool right = false;

  bool active() const { return strength > 0.0 && width > 0.0 && (left || right); }
  // damping coefficient strength * s(x), s a smooth ramp equal to 1 at the edge
  std::vector<double> coefficient(const SimGrid& grid) const;
};

struct SolverConfig {
  double dt_max = 0.25;
  double cfl = 0.25;  // fraction of the RK4 imaginary-axis stability bound
  bool adaptive = true;
  bool dealias = true;
  double blowup_threshold = 50.0;
  double grad_growth_limit = 1e3;
  double energy_jump_tol = 1e-5;
  int max_rejections = 30;
  FftRigor rigor = FftRigor::Estimate;
};

struct SolverState {
  double t = 0.0;
  std::vector<double> u;
  std::size_t step_count = 0;
  double dt = 0.0;
};

struct StepDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double max_abs = 0.0;
  double grad_l2 = 0.0;
};

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
};

Conserved conserved_quantities(const PeriodicGrid& grid, std::span<const double> field);

// Exact linear flow v_t + v_xxx = 0.
std::vector<double> evolve_airy(const PeriodicGrid& grid, std::span<const double> field, double duration);

// ETDRK4 (exact linear part, four nonlinear stages) for u_t + (u_xx + u^5)_x = 0 on a periodic grid.
class GkdvSolver {
 public:
  GkdvSolver(const SimGrid& grid, const SolverConfig& cfg, const SpongeSpec& sponge, std::span<const double> u0,
             double t0 = 0.0);

  const SimGrid& grid() const { return grid_; }
  double time() const { return t_; }
  std::size_t step_count() const { return steps_; }
  double dt_cap() const { return dt_cap_; }
  std::span<const double> field() const { return u_; }
  SolverState state() const { return {t_, u_, steps_, last_.dt}; }
  const StepDiagnostics& diagnostics() const { return last_; }
  // mass and energy removed by the sponge so far; conserved totals are field value + absorbed
  double absorbed_mass() const { return absorbed_mass_; }
  double absorbed_energy() const { return absorbed_energy_; }

  // Takes one accepted step no longer than max_dt.
  void step(double max_dt);
  // Steps until exactly t_target.
  void advance_to(double t_target);

  std::function<void(const StepDiagnostics&)> on_step;

 private:
  // exponential time-differencing coefficients for one step size
  struct Coefficients {
    std::vector<std::complex<double>> e, e2, q, f1, f2, f3;
  };
  const Coefficients& coefficients(double h);
  void nonlinear_from_real(std::span<std::complex<double>> out);
  void nonlinear(std::span<const std::complex<double>> v, std::span<std::complex<double>> out);
  void measure(std::span<const std::complex<double>> v, std::span<const double> u, StepDiagnostics& d) const;
  double proposed_dt() const;

  SimGrid grid_;
  SolverConfig cfg_;
  RealFft fft_;
  std::vector<double> damping_;
  bool sponge_on_;
  std::vector<double> k_, ik_mask_, k3_;
  std::vector<std::complex<double>> v_, nv_, na_, nb_, nc_, a_, b_, c_, vn_;
  std::vector<double> u_, un_;
  std::map<double, Coefficients> coef_cache_;
  double t_;
  double dt_cap_;
  std::size_t steps_ = 0;
  double grad0_ = 0.0;
  double absorbed_mass_ = 0.0, absorbed_energy_ = 0.0;
  StepDiagnostics last_;
};

// One step of the solver from a given state (convenience wrapper).
SolverState step_gkdv(const SolverState& state, const SimGrid& grid, const SpongeSpec& sponge,
                      const SolverConfig& cfg = {});

}  // namespace gkdv
