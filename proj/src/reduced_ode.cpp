#include "gkdv/reduced_ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gkdv/error.hpp"

namespace gkdv {

double int_q_exact() { return std::pow(3.0, 0.25) * std::beta(0.25, 0.5) / 2.0; }

ExponentSet exponent_relations(double theta) {
  require(theta > 0.5 && theta < 1.0, ErrorCode::OutOfRange, "theta must lie in (1/2, 1)");
  const double beta = 1.0 / (5.0 - 4.0 * theta);
  return {theta, beta, 0.5 * (1.0 - beta)};
}

double theta_from_beta(double beta) {
  require(beta > 1.0 / 3.0 && beta < 1.0, ErrorCode::OutOfRange, "beta must lie in (1/3, 1)");
  return (5.0 * beta - 1.0) / (4.0 * beta);
}

double c0_of_theta(double theta) {
  require(theta > 0.5 && theta < 1.0, ErrorCode::OutOfRange, "theta must lie in (1/2, 1)");
  return 0.5 * int_q_exact() * (1.0 - theta) * std::pow(2.0 * theta - 1.0, -(1.0 - theta));
}

double ReducedParams::amplitude() const { return c0 ? *c0 : c0_of_theta(theta); }
double ReducedParams::integral() const { return int_q > 0.0 ? int_q : int_q_exact(); }
double ReducedParams::coupling() const { return 4.0 * amplitude() / integral(); }

ReducedDerivative reduced_rhs(const ReducedState& st, const ReducedParams& p) {
  if (!(st.lambda > 0.0) || !(st.sigma > 0.0))
    fail(ErrorCode::Singular, "reduced system needs lambda > 0 and sigma > 0");
  const double K = p.coupling();
  const double th = p.theta;
  const double sl = std::sqrt(st.lambda);
  const double st_th = std::pow(st.sigma, -th);
  // differentiate b/lambda^2 + K lambda^{-3/2} sigma^{-theta} = const along lambda_s = -b lambda, sigma_s = lambda
  const double bs = -2.0 * st.b * st.b + K * (-1.5 * st.b * sl * st_th + th * st.lambda * sl * st_th / st.sigma);
  return {-st.b * st.lambda, st.lambda, bs};
}

ReducedState closed_form(double s, double theta) {
  require(s > 0.0, ErrorCode::OutOfRange, "closed form needs s > 0");
  const double a = 2.0 * theta - 1.0;
  return {s, std::pow(s, 2.0 * (1.0 - theta) / a), a * std::pow(s, 1.0 / a), -(2.0 * (1.0 - theta) / a) / s};
}

ReducedInvariants gh_quantities(const ReducedState& st, const ReducedParams& p) {
  if (!(st.lambda > 0.0) || !(st.sigma > 0.0)) fail(ErrorCode::Singular, "invariants need lambda, sigma > 0");
  const double th = p.theta;
  const double g = st.b / (st.lambda * st.lambda) + p.coupling() * std::pow(st.lambda, -1.5) * std::pow(st.sigma, -th);
  const double h =
      std::sqrt(st.lambda) - (2.0 * p.amplitude() / ((1.0 - th) * p.integral())) * std::pow(st.sigma, 1.0 - th);
  return {g, g, h};
}

double time_from_s(double s, double beta) {
  const double a = 3.0 * beta - 1.0;
  return 0.5 * a * std::pow(s, 2.0 / a);
}

double s_from_time(double t, double beta) {
  const double a = 3.0 * beta - 1.0;
  return std::pow(2.0 * t / a, 0.5 * a);
}

double c_lambda(double beta) { return std::pow(0.5 * (3.0 * beta - 1.0), -0.5 * (1.0 - beta)); }
double c_sigma(double beta) { return std::pow(0.5 * (3.0 * beta - 1.0), 1.0 - beta) / beta; }

TimeLaws original_time_laws(double t, double beta) {
  require(t > 0.0, ErrorCode::OutOfRange, "time laws need t > 0");
  require(beta > 1.0 / 3.0 && beta < 1.0, ErrorCode::OutOfRange, "beta must lie in (1/3, 1)");
  return {c_lambda(beta) * std::pow(t, 0.5 * (1.0 - beta)), c_sigma(beta) * std::pow(t, beta)};
}

std::vector<ReducedState> integrate_reduced(const ReducedState& start, std::span<const double> s_out,
                                            const ReducedParams& p, double rtol, double atol, bool project_l0) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 3>;
  std::vector<ReducedState> out;
  out.reserve(s_out.size());
  // log variables for the positive scales keep the error control relative
  State x{std::log(start.lambda), std::log(start.sigma), start.b};
  auto sys = [&p](const State& y, State& dy, double s) {
    const double lam = std::exp(y[0]), sig = std::exp(y[1]);
    const auto d = reduced_rhs({s, lam, sig, y[2]}, p);
    dy = {d.lambda / lam, d.sigma / sig, d.b};
  };
  for (double s : s_out)
    if (s <= start.s) out.push_back(start);
  const double K = p.coupling();
  // l0 is a difference of two nearly equal terms; below roundoff it is the l0 = 0 regime exactly
  double l0 = gh_quantities(start, p).l0;
  const double l0_scale = std::fabs(start.b) / (start.lambda * start.lambda) +
                          K * std::pow(start.lambda, -1.5) * std::pow(start.sigma, -p.theta);
  if (std::fabs(l0) <= 64.0 * std::numeric_limits<double>::epsilon() * l0_scale) l0 = 0.0;
  auto project = [&](State& y) {
    const double lam = std::exp(y[0]), sig = std::exp(y[1]);
    y[2] = lam * lam * l0 - K * std::sqrt(lam) * std::pow(sig, -p.theta);
  };
  auto stepper = odeint::make_controlled(atol, rtol, odeint::runge_kutta_dopri5<State>());
  double s = start.s;
  double dt = 1e-4 * std::max(std::fabs(start.s), 1e-3);
  for (double target : s_out) {
    if (target <= start.s) continue;
    require(target >= s, ErrorCode::OutOfRange, "output abscissae must be ascending");
    while (s < target) {
      double h = std::min(dt, target - s);
      const bool last = h == target - s;
      const double proposed = h;
      // try_step advances s and rewrites h with the next suggestion
      if (stepper.try_step(sys, x, s, h) == odeint::success) {
        if (last) s = target;
        if (project_l0) project(x);
        dt = last ? std::max(dt, h) : h;
      } else {
        dt = std::min(h, 0.5 * proposed);
      }
      require(std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]), ErrorCode::NonFinite,
              "reduced ODE state became non-finite");
      require(dt > 1e-14 * std::max(1.0, std::fabs(s)), ErrorCode::Singular, "reduced ODE step size underflow (trajectory left the tube)");
    }
    out.push_back({target, std::exp(x[0]), std::exp(x[1]), x[2]});
  }
  return out;
}

double kappa_of_theta(double theta) { return 2.0 * (2.0 * theta - 1.0) / (1.0 - theta); }
double rho_of_theta(double theta) {
  return 0.5 * std::min(1.0 / 12.0, (1.0 - theta) / (3.0 * (2.0 * theta - 1.0)));
}

}  // namespace gkdv
