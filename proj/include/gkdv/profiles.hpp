#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gkdv/discretization.hpp"

namespace gkdv {

inline constexpr double kGamma = 0.75;   // cutoff exponent of Q_b
inline constexpr double kBStar = 0.1;    // default admissible |b|

struct ProfileSet {
  ProfileGrid grid;
  std::vector<double> q, q_prime, lambda_q, q_cubed, r_profile, p_profile;
  std::vector<double> r_prime, p_prime, p_second;
  std::vector<double> p_decaying;  // P - p_inf * S, S = (1 - tanh y)/2
  std::vector<double> g_field;     // G = 1/2 int Q + int_{-inf}^y LambdaQ
  double int_q = 0.0, int_q_sq = 0.0, pq_pairing = 0.0, rq_pairing = 0.0;
  double p_inf = 0.0;
  double eq_residual = 0.0;  // ||-Q'' + Q - Q^5||_inf
  double r_residual = 0.0;   // ||L R - 5 Q^4||_inf
  double p_residual = 0.0;   // ||(L P)' - Lambda Q||_inf
  std::size_t r_iterations = 0, p_iterations = 0;
};

std::vector<double> build_ground_state(const ProfileGrid& grid);

// L f = -f'' + f - 5 Q^4 f with a spectral second derivative
std::vector<double> apply_linearized(const ProfileGrid& grid, std::span<const double> field);

struct RSolution {
  std::vector<double> r;
  std::size_t iterations = 0;
  double residual = 0.0;
};
RSolution solve_profile_R(const ProfileGrid& grid);

struct PSolution {
  std::vector<double> p, p_decaying, g;
  double p_inf = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};
PSolution solve_profile_P(const ProfileGrid& grid);

// the non-decaying reference step carried by P
double p_step(double y);
double p_step_prime(double y);

double build_cutoff_chi(double x);

ProfileSet build_profile_set(const ProfileGrid& grid);

struct LocalizedProfile {
  double b_value = 0.0;
  std::vector<double> q_b, p_b, dqb_db, psi_b;
};

// Q_b = Q + b chi_b P and the error term Psi_b on the profile grid.
LocalizedProfile build_localized_profile(double b, const ProfileSet& set, double b_star = kBStar);

// Local Lagrange interpolation of decaying samples; zero off the grid.
class LocalInterpolant {
 public:
  LocalInterpolant(const PeriodicGrid& grid, std::vector<double> samples, int order = 10);
  double operator()(double y) const;

 private:
  double x_min_, h_;
  std::vector<double> v_;
  std::vector<double> w_;
  int order_;
};

// Pointwise evaluation of R, P and Q_b off the profile grid.
class ProfileFunctions {
 public:
  explicit ProfileFunctions(std::shared_ptr<const ProfileSet> set);
  const ProfileSet& set() const { return *set_; }

  double r(double y) const { return r_(y); }
  double dr(double y) const { return dr_(y); }
  double p(double y) const;
  double dp(double y) const;
  double chi_b(double b, double y) const;
  double dchi_b(double b, double y) const;  // d/dy
  double q_b(double b, double y) const;
  double dq_b(double b, double y) const;    // d/dy
  double dqb_db(double b, double y) const;

 private:
  std::shared_ptr<const ProfileSet> set_;
  LocalInterpolant r_, dr_, pd_, dpd_;
};

}  // namespace gkdv
