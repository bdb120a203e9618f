#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gkdv/discretization.hpp"
#include "gkdv/profiles.hpp"
#include "gkdv/reduced_ode.hpp"

namespace gkdv {

struct ModulationOptions {
  double alpha_star = 0.1;     // tube radius in the local L2 norm
  double newton_tol = 1e-12;   // on (eps, Z_i) / ||Z_i||
  int max_iterations = 25;
  double det_floor = 1e-6;     // relative to the Q-only Jacobian determinant
  double B = 100.0;            // weight scale of N_B
  double b_star = kBStar;
  double window = 60.0;        // |y| range of the orthogonality pairings
  double loc_length = 10.0;    // L2_loc weight e^{-|y|/loc_length}
  bool profile_epsilon = true; // also sample eps on the profile grid
};

struct ModulationGuess {
  double lambda = 1.0;
  double sigma = 0.0;
  double b = 0.0;
};

struct ModulationFrame {
  double t = 0.0;
  double lambda = 1.0, sigma = 0.0, b = 0.0, r = 0.0;
  std::vector<double> epsilon;    // eps on the profile grid
  std::vector<double> epsilon_x;  // eps((x_j - sigma)/lambda) at the simulation nodes
  std::array<double, 3> ortho_residuals{};
  int newton_iters = 0;
  double jacobian_det = 0.0;   // |det J| lambda^2 / Q-only value
  double tube_distance = 0.0;  // ||eps||_{L2_loc}
  double eps_l2 = 0.0;
  double nb_norm = 0.0;        // (int eps^2 phi_B + int eps_y^2 psi_B)^{1/2}
  double mass = 0.0, energy = 0.0;  // of u
};

// Splits lambda^{1/2}(u - f)(lambda y + sigma) = Q_b + r R + eps with eps orthogonal to
// Lambda Q, y Lambda Q and Q, by Newton on (lambda, sigma, b).
class Modulator {
 public:
  Modulator(std::shared_ptr<const ProfileSet> profiles, const SimGrid& grid, ModulationOptions opts = {});

  const SimGrid& grid() const { return grid_; }
  const ProfileFunctions& functions() const { return fns_; }
  const ModulationOptions& options() const { return opts_; }

  ModulationFrame decompose(double t, std::span<const double> u, std::span<const double> f,
                            const ModulationGuess& guess) const;

  // lambda^{-1/2} (Q_b + r R)((x - sigma)/lambda) on the simulation nodes
  std::vector<double> ansatz_field(double lambda, double sigma, double b, double r) const;

  // value of the Q-only Jacobian determinant (1/16)||Lambda Q||^4 (int Q)^2
  double reference_det() const { return det_ref_; }

 private:
  struct Pairings {
    std::array<double, 3> qb, dqb;  // (Q_b, Z_i), (dQ_b/db, Z_i)
  };
  Pairings profile_pairings(double b) const;

  std::shared_ptr<const ProfileSet> set_;
  ProfileFunctions fns_;
  SimGrid grid_;
  ModulationOptions opts_;
  std::array<double, 3> z_norm_{}, rz_{};
  double det_ref_ = 0.0;
};

struct SeriesRecord {
  double t = 0.0, s = 0.0;
  double lambda = 0.0, sigma = 0.0, b = 0.0, r = 0.0;
  double g = 0.0, h = 0.0;
  double m1 = 0.0, m2 = 0.0, m_norm = 0.0;
  bool m_valid = false;
  double nb_norm = 0.0;
  double mass = 0.0, energy = 0.0;
};

struct SeriesOptions {
  double s0 = 0.0;            // s at the first frame
  double max_gap = 0.5;       // GapTooLarge above this spacing in s
  ReducedParams params{};     // theta, c0, int Q for g and h
};

// s(t) = s0 + int dt/lambda^3 with piecewise cubic quadrature; m from five-point
// centered differences in t, converted with ds/dt = lambda^{-3}.
std::vector<SeriesRecord> assemble_series(std::span<const ModulationFrame> frames, const SeriesOptions& opts);

// Fornberg weights for the first derivative at z on arbitrary nodes.
std::vector<double> derivative_weights(double z, std::span<const double> nodes);

}  // namespace gkdv
