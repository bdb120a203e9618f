#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/discretization.hpp"
#include "gkdv/modulation.hpp"

namespace gkdv {

struct FunctionalSample {
  double t = 0.0;
  std::string name;
  double value = 0.0;
  std::map<std::string, double> parameters;
};

struct PowerFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t points = 0;
};

// Parameters of the self-similar weight omega_r((x - t^beta)/t^{nu+eps}).
struct DecayParams {
  double r = 1.0;
  double eps_exp = 0.001;
  double beta = 0.5;
  double nu = 0.25;
};

// 0 < r < 2 theta + 4, r != 5, 0 < eps < (3 beta - 1)|r - 5|/20; OutOfRange otherwise.
void check_decay_params(const DecayParams& p);

// int q^2 omega_r(xbar) dx
double functional_Mr(const PeriodicGrid& grid, std::span<const double> q, double t, const DecayParams& p);

// t^{2nu+2eps} int [q_x^2 - ((q+f0)^6 - f0^6 - 6 q f0^5)/3] omega_{r+2}(xbar) dx
double functional_Er(const PeriodicGrid& grid, std::span<const double> q, std::span<const double> f0, double t,
                     const DecayParams& p);

struct FunctionalF {
  double value = 0.0;
  double kappa = 0.0;
  double scaled = 0.0;  // lambda^kappa * value
};

// W + F = Q_b + r R + lambda^{1/2} f(lambda y + sigma) on the simulation nodes
std::vector<double> w_plus_f(const Modulator& mod, const ModulationFrame& frame, std::span<const double> f);

// energy-virial functional in the y variable, evaluated on the simulation nodes
FunctionalF functional_F(const SimGrid& grid, const ModulationFrame& frame, std::span<const double> w_plus_f,
                         double B, double theta);

// lambda^{-1/2} Q((x - sigma)/lambda)
std::vector<double> soliton_part(const SimGrid& grid, double lambda, double sigma);

struct JK {
  double J = 0.0, K = 0.0;
};

// xi = chi((4x - sigma_t)/sigma_tau - 2); A from (lambda_tau, sigma_tau)
JK functional_JK(const SimGrid& grid, std::span<const double> eta, double sigma_t, double sigma_tau,
                 double lambda_tau);

// least squares in log-log coordinates over t in [t_lo, t_hi]
PowerFit fit_power_law(std::span<const std::pair<double, double>> series, double t_lo, double t_hi);
// final decade [t_max/10, t_max]
PowerFit fit_power_law(std::span<const std::pair<double, double>> series);

struct RightNorms {
  double l2 = 0.0, h1 = 0.0;
};

// norms over the nodes with x > sigma/2
RightNorms residue_right_norm(const SimGrid& grid, std::span<const double> eta, double sigma);

// int_{x > sigma/2} u^2
double right_mass(const SimGrid& grid, std::span<const double> u, double sigma);

enum class AiryVerdict { NonScattering, ScatteringLike, Inconclusive, Undefined };
std::string to_string(AiryVerdict v);

struct AiryReport {
  double t_mid = 0.0, t_final = 0.0, sigma_final = 0.0;
  double nonlinear_right_mass = 0.0;  // of U(t_final)
  double linear_right_mass = 0.0;     // of the Airy flow of U(t_mid)
  double q_mass = 0.0;
  double initial_mass = 0.0;
  AiryVerdict verdict = AiryVerdict::Undefined;
};

struct AiryOptions {
  double keep_fraction = 0.75;  // nonlinear right mass >= this * int Q^2
  double lose_fraction = 0.25;  // linear right mass <= this * int Q^2
  // the linear flow runs on a grid extended to the left so dispersed waves do not wrap around
  std::size_t pad_factor = 4;
};

AiryReport airy_compare(const SimGrid& grid, std::span<const double> u_mid, double t_mid,
                        std::span<const double> u_final, double t_final, double sigma_final,
                        const AiryOptions& opts = {});

// Monotone-up-to-slack check: max_{i > j} (v_i - v_j) <= slack * |v_0|.
struct MonotoneReport {
  bool ok = true;
  double worst_rise = 0.0;  // largest increase relative to |v_0|
};
MonotoneReport non_increasing_with_slack(std::span<const double> values, double rel_slack);

}  // namespace gkdv
