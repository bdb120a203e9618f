#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gkdv {

// integral of Q = 3^{1/4} B(1/4, 1/2) / 2
double int_q_exact();

struct ExponentSet {
  double theta;
  double beta;
  double nu;
};
ExponentSet exponent_relations(double theta);
double theta_from_beta(double beta);

// c0 = (int Q / 2)(1 - theta)(2 theta - 1)^{-(1 - theta)}
double c0_of_theta(double theta);

struct ReducedParams {
  double theta = 0.75;
  std::optional<double> c0;  // defaults to c0_of_theta
  double int_q = 0.0;        // 0 selects the exact value

  double amplitude() const;  // c0 actually used
  double integral() const;
  double coupling() const;   // K = 4 c0 / int Q
};

struct ReducedState {
  double s = 0.0;
  double lambda = 1.0;
  double sigma = 1.0;
  double b = 0.0;
};

struct ReducedDerivative {
  double lambda, sigma, b;
};

ReducedDerivative reduced_rhs(const ReducedState& st, const ReducedParams& p);
ReducedState closed_form(double s, double theta);

struct ReducedInvariants {
  double l0, g, h;
};
ReducedInvariants gh_quantities(const ReducedState& st, const ReducedParams& p);

double time_from_s(double s, double beta);
double s_from_time(double t, double beta);

struct TimeLaws {
  double lambda_pred, sigma_pred;
};
double c_lambda(double beta);
double c_sigma(double beta);
TimeLaws original_time_laws(double t, double beta);

// Dormand-Prince 5(4) trajectory sampled at the requested s values (ascending).
// With project_l0 the b component is reset from the conserved l0 after every accepted step;
// the closed-form solution is unstable along l0, so without it roundoff eventually departs.
std::vector<ReducedState> integrate_reduced(const ReducedState& start, std::span<const double> s_out,
                                            const ReducedParams& p, double rtol = 1e-12, double atol = 1e-15,
                                            bool project_l0 = true);

// kappa = 2(2 theta - 1)/(1 - theta) and rho = min(1/12, (1 - theta)/(3(2 theta - 1)))/2
double kappa_of_theta(double theta);
double rho_of_theta(double theta);

}  // namespace gkdv
